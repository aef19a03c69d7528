// Command-line driver: dataset generation, training, evaluation, tree-count
// sweep and streaming diagnosis.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "ocfd/diagnosis.hpp"
#include "ocfd/experiment.hpp"

namespace {

using ocfd::io::ExperimentConfig;

struct SharedOptions {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out;
};

void add_shared(CLI::App* cmd, SharedOptions& opts, bool out_required) {
    cmd->add_option("--config", opts.config_path, "key = value experiment configuration")->check(CLI::ExistingFile);
    cmd->add_option_function<std::uint64_t>(
        "--seed",
        [&opts](const std::uint64_t& s) {
            opts.seed = s;
            opts.seed_given = true;
        },
        "master random seed");
    auto* out = cmd->add_option("--out", opts.out, "output path");
    if (out_required) out->required();
}

ExperimentConfig resolve_config(const SharedOptions& opts) {
    ExperimentConfig cfg = opts.config_path.empty() ? ExperimentConfig{} : ocfd::io::load_config_file(opts.config_path);
    if (opts.seed_given) cfg.set_seed(opts.seed);
    return cfg;
}

void print_accuracy(const char* what, const ocfd::forest::ConfusionMatrix& cm) {
    std::cout << what << " accuracy: " << cm.accuracy() << " (" << cm.correct() << "/" << cm.total() << ")\n";
    std::cout << ocfd::io::format_confusion(cm);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Open-circuit fault diagnosis for three-phase converters"};
    app.require_subcommand(1);

    SharedOptions gen_opts;
    std::string scenario;
    double duration = 0.0;
    auto* gen = app.add_subcommand("gen", "simulate a labeled dataset (or one scenario series)");
    add_shared(gen, gen_opts, true);
    gen->add_option("--scenario", scenario, "fault events label@time[,label@time...]; writes one series");
    gen->add_option("--duration", duration, "scenario duration in seconds");

    SharedOptions train_opts;
    std::string train_data;
    std::size_t trees = 0;
    unsigned threads = 0;
    bool threads_given = false;
    auto* train = app.add_subcommand("train", "train a forest on a dataset and report held-out accuracy");
    add_shared(train, train_opts, true);
    train->add_option("--data", train_data, "dataset CSV")->required()->check(CLI::ExistingFile);
    train->add_option("--trees", trees, "number of trees (default 264)");
    train->add_option_function<unsigned>(
        "--threads",
        [&](const unsigned& t) {
            threads = t;
            threads_given = true;
        },
        "training threads (0 = all cores)");

    SharedOptions eval_opts;
    std::string eval_model, eval_data;
    auto* eval = app.add_subcommand("eval", "accuracy and confusion matrix of a model on a dataset");
    add_shared(eval, eval_opts, false);
    eval->add_option("--model", eval_model, "model file")->required()->check(CLI::ExistingFile);
    eval->add_option("--data", eval_data, "dataset CSV")->required()->check(CLI::ExistingFile);

    SharedOptions sweep_opts;
    std::string sweep_data;
    std::vector<std::size_t> counts;
    auto* sweep = app.add_subcommand("sweep-trees", "cross-validated accuracy versus tree count");
    add_shared(sweep, sweep_opts, false);
    sweep->add_option("--data", sweep_data, "dataset CSV")->required()->check(CLI::ExistingFile);
    sweep->add_option("--counts", counts, "tree counts")->delimiter(',');

    SharedOptions diag_opts;
    std::string diag_model, diag_data, report_path;
    bool history = false;
    auto* diag = app.add_subcommand("diagnose", "run the online diagnosis on each series of a dataset");
    add_shared(diag, diag_opts, false);
    diag->add_option("--model", diag_model, "model file")->required()->check(CLI::ExistingFile);
    diag->add_option("--data", diag_data, "dataset CSV")->required()->check(CLI::ExistingFile);
    diag->add_option("--report", report_path, "append report records to this file");
    diag->add_flag("--history", history, "include per-window verdicts in each record");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            ExperimentConfig cfg = resolve_config(gen_opts);
            if (!scenario.empty()) {
                std::istringstream line("scenario = " + scenario);
                cfg.scenario = ocfd::io::parse_config(line).scenario;
            }
            if (duration > 0.0) cfg.scenario_duration = duration;
            const auto ds = cfg.scenario.empty() && scenario.empty() ? ocfd::io::generate_dataset(cfg)
                                                                      : ocfd::io::generate_scenario(cfg);
            ocfd::io::save_dataset_file(ds, gen_opts.out);
            std::cout << "wrote " << ds.row_count() << " rows in " << ds.series.size() << " series to " << gen_opts.out
                      << "\n";
            return 0;
        }
        if (*train) {
            ExperimentConfig cfg = resolve_config(train_opts);
            if (trees > 0) cfg.forest.n_trees = trees;
            if (threads_given) cfg.forest.threads = threads;
            const auto ds = ocfd::io::load_dataset_file(train_data);
            const auto outcome = ocfd::io::run_train(ds, cfg);
            ocfd::forest::save_model_file(outcome.model, train_opts.out);
            std::cout << "trained " << outcome.model.n_trees() << " trees on " << outcome.train_rows << " rows, tested on "
                      << outcome.test_rows << " rows\n";
            print_accuracy("held-out", outcome.held_out);
            return 0;
        }
        if (*eval) {
            const auto model = ocfd::forest::load_model_file(eval_model);
            const auto ds = ocfd::io::load_dataset_file(eval_data);
            print_accuracy("dataset", ocfd::forest::evaluate(model, ds.to_training_set()));
            return 0;
        }
        if (*sweep) {
            ExperimentConfig cfg = resolve_config(sweep_opts);
            if (!counts.empty()) cfg.tree_counts = counts;
            const auto ds = ocfd::io::load_dataset_file(sweep_data);
            const auto points = ocfd::io::run_sweep(ds, cfg);
            if (sweep_opts.out.empty()) {
                ocfd::io::write_sweep_csv(points, std::cout);
            } else {
                std::ofstream out(sweep_opts.out, std::ios::binary);
                if (!out) throw std::runtime_error("cannot open '" + sweep_opts.out + "' for writing");
                ocfd::io::write_sweep_csv(points, out);
            }
            return 0;
        }
        if (*diag) {
            const ExperimentConfig cfg = resolve_config(diag_opts);
            const auto model = ocfd::forest::load_model_file(diag_model);
            const auto ds = ocfd::io::load_dataset_file(diag_data);
            const auto reports = ocfd::io::run_diagnose(model, ds, cfg);
            std::ofstream report_file;
            if (!report_path.empty()) {
                report_file.open(report_path, std::ios::app);
                if (!report_file) throw std::runtime_error("cannot open '" + report_path + "' for appending");
            }
            bool fired = false;
            for (std::size_t i = 0; i < reports.size(); ++i) {
                const std::string record = ocfd::diagnosis::to_json(reports[i], history, ds.series[i].id);
                std::cout << record << '\n';
                if (report_file.is_open()) report_file << record << '\n';
                fired = fired || reports[i].protection_signal;
            }
            return fired ? 1 : 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
