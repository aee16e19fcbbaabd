#include <cstdio>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "chiralmet/runners.hpp"

using namespace chiralmet;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_path;
    std::string format = "csv";
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_config) {
    auto* config = cmd->add_option("--config", opts.config_path,
                                   "scenario config (JSON, named blocks)");
    config->check(CLI::ExistingFile);
    if (needs_config) config->required();
    cmd->add_option("--out", opts.out_path,
                    "write the result to this path (default: stdout)");
    cmd->add_option("--format", opts.format, "table format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    cmd->add_option("--seed", opts.seed, "override measurement.seed");
    cmd->add_option("--threads", opts.threads, "sweep worker threads")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

ScenarioConfig load_config(const CommonOpts& opts) {
    ScenarioConfig config = load_scenario(opts.config_path);
    if (opts.seed) config.seed = *opts.seed;
    return config;
}

int emit_table(const ResultTable& table, const CommonOpts& opts,
               const char* what) {
    const std::string text =
        opts.format == "json" ? table.to_json() : table.to_csv();
    if (opts.out_path.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        write_text_file(opts.out_path, text);
        std::printf("%s: %zu rows -> %s (%s)\n", what, table.rows.size(),
                    opts.out_path.c_str(), opts.format.c_str());
    }
    return 0;
}

int emit_text(const std::string& text, const CommonOpts& opts,
              const char* what) {
    std::fputs(text.c_str(), stdout);
    if (!opts.out_path.empty()) {
        write_text_file(opts.out_path, text);
        std::printf("%s -> %s\n", what, opts.out_path.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "precision limits for estimating the concentration of a chiral "
        "solution with bright Gaussian probes"};
    app.require_subcommand(1);

    CommonOpts qfi_opts;
    auto* qfi = app.add_subcommand(
        "qfi", "QFI terms, SQL, and precision advantage per sweep point");
    add_common(qfi, qfi_opts, true);

    CommonOpts fig2_opts;
    auto* fig2 = app.add_subcommand(
        "fig2",
        "dilute-limit enhancement grid, s in [0, 1.8], eta in "
        "{1, 0.95, 0.9, 0.8}");
    add_common(fig2, fig2_opts, false);

    CommonOpts sucrose_opts;
    double sucrose_s = 1.0;
    double sucrose_eta = 1.0;
    double sucrose_alpha_sq = 1e9;
    auto* sucrose = app.add_subcommand(
        "sucrose", "worked example: 1% w/w sucrose, l = 1 cm, |alpha|^2 = 1e9");
    add_common(sucrose, sucrose_opts, false);
    sucrose->add_option("--s", sucrose_s, "squeezing factor")
        ->capture_default_str();
    sucrose->add_option("--eta", sucrose_eta, "system efficiency")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    sucrose->add_option("--alpha-sq", sucrose_alpha_sq, "mean photon number")
        ->capture_default_str();

    CommonOpts dich_opts;
    auto* dich = app.add_subcommand(
        "dichroism", "beta-normalized uncertainty and precision ratio");
    add_common(dich, dich_opts, true);

    CommonOpts sim_opts;
    auto* sim = app.add_subcommand(
        "simulate", "Monte Carlo estimation run with bound verdicts");
    add_common(sim, sim_opts, true);

    CommonOpts val_opts;
    auto* val = app.add_subcommand(
        "validate",
        "oracle cross-validation, Monte Carlo CRB suite, arbitration "
        "report; nonzero exit on any violation");
    add_common(val, val_opts, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(qfi)) {
            set_sweep_threads(qfi_opts.threads);
            return emit_table(run_qfi(load_config(qfi_opts)), qfi_opts,
                              "qfi");
        }
        if (app.got_subcommand(fig2))
            return emit_table(run_fig2(), fig2_opts, "fig2");
        if (app.got_subcommand(sucrose)) {
            const SucroseReport rep =
                run_sucrose(sucrose_s, sucrose_eta, sucrose_alpha_sq);
            if (!sucrose_opts.out_path.empty()) {
                const ResultTable table = rep.to_table();
                const std::string text = sucrose_opts.format == "json"
                                             ? table.to_json()
                                             : table.to_csv();
                write_text_file(sucrose_opts.out_path, text);
            }
            std::fputs(rep.to_text().c_str(), stdout);
            if (!sucrose_opts.out_path.empty())
                std::printf("sucrose table -> %s (%s)\n",
                            sucrose_opts.out_path.c_str(),
                            sucrose_opts.format.c_str());
            return 0;
        }
        if (app.got_subcommand(dich)) {
            set_sweep_threads(dich_opts.threads);
            return emit_table(run_dichroism(load_config(dich_opts)),
                              dich_opts, "dichroism");
        }
        if (app.got_subcommand(sim))
            return emit_table(run_simulate(load_config(sim_opts)), sim_opts,
                              "simulate");
        if (app.got_subcommand(val)) {
            const ValidationReport rep = run_validate();
            emit_text(rep.to_text(), val_opts, "validation report");
            return rep.passed() ? 0 : 2;
        }
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 1;
    }
    return 0;
}
