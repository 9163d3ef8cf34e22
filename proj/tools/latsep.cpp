// Command-line front end: model fitting, encoding, separation and the
// experiment/validation runners. File formats are documented in README.md.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "latsep/codec.hpp"
#include "latsep/datagen.hpp"
#include "latsep/experiment.hpp"
#include "latsep/io.hpp"
#include "latsep/likelihood.hpp"
#include "latsep/metrics.hpp"
#include "latsep/prior.hpp"
#include "latsep/refine.hpp"
#include "latsep/separator.hpp"

namespace fs = std::filesystem;
using namespace latsep;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitModel = 2;

void cmd_codec_fit(const std::string& input, int k, int p, std::uint64_t seed,
                   const std::string& out) {
    const auto records = read_signal_dataset(input);
    std::vector<Signal> corpus;
    corpus.reserve(records.size());
    for (const auto& r : records) corpus.push_back(r.samples);
    save_codebook(fit_codebook(corpus, k, p, seed), out);
}

void cmd_encode(const std::string& codec_path, const std::string& input,
                const std::string& out) {
    const Codebook codec = load_codebook(codec_path);
    const auto records = read_signal_dataset(input);
    std::vector<TokenRecord> tokens;
    tokens.reserve(records.size());
    for (const auto& r : records) {
        tokens.push_back({r.id, r.class_name, encode(codec, r.samples)});
    }
    write_token_dataset(tokens, out);
}

void cmd_decode(const std::string& codec_path, const std::string& input,
                const std::string& out) {
    const Codebook codec = load_codebook(codec_path);
    const auto records = read_token_dataset(input);
    std::vector<SignalRecord> signals;
    signals.reserve(records.size());
    for (const auto& r : records) {
        signals.push_back({r.id, r.class_name, decode(codec, r.tokens)});
    }
    write_signal_dataset(signals, out);
}

void cmd_likelihood_build(const std::string& codec_path, const std::string& pairs_path,
                          const std::string& out, const std::string& counts_out) {
    const Codebook codec = load_codebook(codec_path);
    const auto pairs = read_signal_pairs(pairs_path);
    const CountTensor counts = build_counts(pairs, codec);
    if (!counts_out.empty()) save_counts(counts, counts_out);
    save_likelihood(normalize(counts), out);
}

void cmd_prior_train(const std::string& codec_path, const std::string& input,
                     int order, double delta, const std::string& class_filter,
                     const std::string& out) {
    const Codebook codec = load_codebook(codec_path);
    const auto records = read_signal_dataset(input);
    std::vector<TokenSeq> corpus;
    for (const auto& r : records) {
        if (!class_filter.empty() && r.class_name != class_filter) continue;
        corpus.push_back(encode(codec, r.samples));
    }
    save_prior(train_ngram(corpus, codec.k, order, delta), out);
}

void cmd_separate(const std::string& mixture_path, const std::string& codec_path,
                  const std::string& likelihood_path, const std::string& prior1_path,
                  const std::string& prior2_path, const std::string& config_path,
                  int refine_steps, double refine_alpha, bool refine_backtrack,
                  const std::string& out_dir) {
    const SignalRecord mixture = read_signal_file(mixture_path);
    const Codebook codec = load_codebook(codec_path);
    const LikelihoodModel lik = load_likelihood(likelihood_path);
    const NGramPrior prior1 = load_prior(prior1_path);
    const NGramPrior prior2 = load_prior(prior2_path);
    const SeparationConfig cfg = parse_separation_config(read_text_file(config_path));

    SeparationResult result = separate(mixture.samples, {prior1, prior2}, lik,
                                       codec, cfg);

    nlohmann::json summary;
    summary["config"] = nlohmann::json::parse(separation_config_json(cfg));
    if (refine_steps > 0) {
        RefinementConfig rcfg;
        rcfg.steps = refine_steps;
        rcfg.alpha = refine_alpha;
        rcfg.use_backtracking = refine_backtrack;
        auto [r1, r2] = refine(result.x1, result.x2, mixture.samples, codec, rcfg);
        result.x1 = std::move(r1);
        result.x2 = std::move(r2);
        result.residual = l2_distance(mix(result.x1, result.x2), mixture.samples);
        summary["refine"] = {{"steps", rcfg.steps},
                             {"alpha", rcfg.alpha},
                             {"backtrack", rcfg.use_backtracking}};
    }

    fs::create_directories(out_dir);
    write_signal_file({mixture.id + "-source1", "", result.x1},
                      (fs::path(out_dir) / "source1.json").string());
    write_signal_file({mixture.id + "-source2", "", result.x2},
                      (fs::path(out_dir) / "source2.json").string());
    summary["logscore"] = result.logscore;
    summary["residual"] = result.residual;
    summary["tokens1"] = result.z1;
    summary["tokens2"] = result.z2;
    write_text_file(summary.dump(2) + "\n",
                    (fs::path(out_dir) / "summary.json").string());
}

void cmd_evaluate(const std::string& config_path, const std::string& out) {
    const ExperimentConfig cfg = parse_experiment_config(read_text_file(config_path));
    const ExperimentReport report = run_experiment(cfg);
    write_text_file(report_json(report), out);
    std::cout << report_table(report);
}

int cmd_oracle_check(const std::string& out) {
    const auto checks = run_oracle_checks();
    if (!out.empty()) write_text_file(oracle_checks_json(checks), out);
    bool all_pass = true;
    for (const auto& c : checks) {
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.test
                  << " (max_error " << c.max_error << ")\n";
        all_pass = all_pass && c.pass;
    }
    return all_pass ? kExitOk : kExitValidation;
}

void cmd_dataset_gen(const std::string& config_path, const std::string& out) {
    const DatasetGenConfig cfg = parse_dataset_gen_config(read_text_file(config_path));
    const PairedDataset ds = generate_dataset(cfg.spec1, cfg.spec2, cfg.count,
                                              cfg.length, cfg.seed);
    std::vector<SignalRecord> records;
    records.reserve(2 * ds.first.size());
    for (std::size_t i = 0; i < ds.first.size(); ++i) {
        const std::string stem = "pair" + std::to_string(i);
        records.push_back({stem + "-a", ds.class1, ds.first[i]});
        records.push_back({stem + "-b", ds.class2, ds.second[i]});
    }
    write_signal_dataset(records, out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian source separation over a quantized latent domain"};
    app.require_subcommand(1);

    int exit_code = kExitOk;

    {
        auto* cmd = app.add_subcommand("codec-fit", "Fit a patch codebook by k-means");
        auto input = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto k = std::make_shared<int>(64);
        auto p = std::make_shared<int>(4);
        auto seed = std::make_shared<std::uint64_t>(0);
        cmd->add_option("--input", *input, "signal dataset (JSON lines)")->required();
        cmd->add_option("--k", *k, "number of codes")->required();
        cmd->add_option("--p", *p, "patch length in samples")->required();
        cmd->add_option("--seed", *seed, "k-means seed");
        cmd->add_option("--out", *out, "output codebook file")->required();
        cmd->callback([=] { cmd_codec_fit(*input, *k, *p, *seed, *out); });
    }
    {
        auto* cmd = app.add_subcommand("encode", "Quantize signals into token sequences");
        auto codec = std::make_shared<std::string>();
        auto input = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        cmd->add_option("--codec", *codec)->required();
        cmd->add_option("--input", *input, "signal dataset (JSON lines)")->required();
        cmd->add_option("--out", *out, "token dataset (JSON lines)")->required();
        cmd->callback([=] { cmd_encode(*codec, *input, *out); });
    }
    {
        auto* cmd = app.add_subcommand("decode", "Decode token sequences back to signals");
        auto codec = std::make_shared<std::string>();
        auto input = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        cmd->add_option("--codec", *codec)->required();
        cmd->add_option("--input", *input, "token dataset (JSON lines)")->required();
        cmd->add_option("--out", *out, "signal dataset (JSON lines)")->required();
        cmd->callback([=] { cmd_decode(*codec, *input, *out); });
    }
    {
        auto* cmd = app.add_subcommand(
            "likelihood-build", "Count latent mixing triples and normalize them");
        auto codec = std::make_shared<std::string>();
        auto pairs = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto counts_out = std::make_shared<std::string>();
        cmd->add_option("--codec", *codec)->required();
        cmd->add_option("--pairs", *pairs,
                        "paired dataset; lines 2i and 2i+1 form a pair")->required();
        cmd->add_option("--out", *out, "output likelihood file")->required();
        cmd->add_option("--counts-out", *counts_out, "also write the raw count tensor");
        cmd->callback([=] { cmd_likelihood_build(*codec, *pairs, *out, *counts_out); });
    }
    {
        auto* cmd = app.add_subcommand("prior-train", "Train an n-gram token prior");
        auto codec = std::make_shared<std::string>();
        auto input = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto class_filter = std::make_shared<std::string>();
        auto order = std::make_shared<int>(3);
        auto delta = std::make_shared<double>(0.1);
        cmd->add_option("--codec", *codec)->required();
        cmd->add_option("--input", *input, "signal dataset (JSON lines)")->required();
        cmd->add_option("--order", *order, "n-gram order (context length + 1)");
        cmd->add_option("--delta", *delta, "additive smoothing");
        cmd->add_option("--class", *class_filter, "train only on this class");
        cmd->add_option("--out", *out, "output prior file")->required();
        cmd->callback([=] {
            cmd_prior_train(*codec, *input, *order, *delta, *class_filter, *out);
        });
    }
    {
        auto* cmd = app.add_subcommand("separate", "Separate one mixture signal");
        auto mixture = std::make_shared<std::string>();
        auto codec = std::make_shared<std::string>();
        auto likelihood = std::make_shared<std::string>();
        auto prior1 = std::make_shared<std::string>();
        auto prior2 = std::make_shared<std::string>();
        auto config = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto refine_steps = std::make_shared<int>(0);
        auto refine_alpha = std::make_shared<double>(0.1);
        auto refine_backtrack = std::make_shared<bool>(false);
        cmd->add_option("--mixture", *mixture, "mixture signal file")->required();
        cmd->add_option("--codec", *codec)->required();
        cmd->add_option("--likelihood", *likelihood)->required();
        cmd->add_option("--prior1", *prior1)->required();
        cmd->add_option("--prior2", *prior2)->required();
        cmd->add_option("--config", *config, "separation config JSON")->required();
        cmd->add_option("--refine-steps", *refine_steps, "refinement iterations");
        cmd->add_option("--refine-alpha", *refine_alpha, "refinement step size");
        cmd->add_flag("--refine-backtrack", *refine_backtrack,
                      "halve the refinement step on objective increase");
        cmd->add_option("--out", *out, "output directory")->required();
        cmd->callback([=] {
            cmd_separate(*mixture, *codec, *likelihood, *prior1, *prior2, *config,
                         *refine_steps, *refine_alpha, *refine_backtrack, *out);
        });
    }
    {
        auto* cmd = app.add_subcommand("evaluate", "Run an end-to-end experiment");
        auto config = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        cmd->add_option("--config", *config, "experiment config JSON")->required();
        cmd->add_option("--out", *out, "output report JSON")->required();
        cmd->callback([=] { cmd_evaluate(*config, *out); });
    }
    {
        auto* cmd = app.add_subcommand(
            "oracle-check", "Cross-validate the samplers against exhaustive enumeration");
        auto out = std::make_shared<std::string>();
        cmd->add_option("--out", *out, "output report JSON");
        cmd->callback([=, &exit_code] { exit_code = cmd_oracle_check(*out); });
    }
    {
        auto* cmd = app.add_subcommand("dataset-gen", "Emit a synthetic paired dataset");
        auto config = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        cmd->add_option("--config", *config, "dataset config JSON")->required();
        cmd->add_option("--out", *out, "output dataset (JSON lines)")->required();
        cmd->callback([=] { cmd_dataset_gen(*config, *out); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ModelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitModel;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitModel;
    }
    return exit_code;
}
