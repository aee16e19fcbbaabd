#include "chiralmet/runners.hpp"

#include <atomic>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "chiralmet/fock.hpp"

namespace chiralmet {

namespace {

std::atomic<int> g_sweep_threads{1};

std::string strf(const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof(buf), pattern, args);
    va_end(args);
    return std::string(buf);
}

// delta_phi = C with unit rotatory power over 1 dm.
ChiralSample rotation_point(double delta_phi, double eta) {
    ChiralSample s;
    s.concentration = delta_phi;
    s.concentration_unit = ConcentrationUnit::grams_per_cm3;
    s.path_length = 1.0;
    s.path_length_unit = PathLengthUnit::decimeters;
    s.rotatory_power = 1.0;
    s.efficiency = eta;
    return s;
}

// arm transmissions T_L, T_R at the working point C = 0.002 mol/L, l = 5 cm.
ChiralSample absorber_point(double T_L, double T_R, double eta) {
    ChiralSample s;
    s.concentration = 0.002;
    s.concentration_unit = ConcentrationUnit::moles_per_liter;
    s.path_length = 5.0;
    s.path_length_unit = PathLengthUnit::centimeters;
    s.eps_L = -std::log10(T_L) / 0.01;
    s.eps_R = -std::log10(T_R) / 0.01;
    s.efficiency = eta;
    return s;
}

template <typename RowFn>
ResultTable sweep_rows(const ScenarioConfig& config,
                       std::vector<std::string> columns, RowFn row_fn) {
    ResultTable table;
    table.columns = std::move(columns);
    if (!config.sweep) {
        table.add_row(row_fn(0.0, config));
        return table;
    }
    const std::vector<double> values = sweep_values(*config.sweep);
    std::vector<std::vector<double>> rows(values.size());
    const auto eval = [&](std::size_t i) {
        ScenarioConfig point = config;
        apply_parameter(point, config.sweep->parameter, values[i]);
        rows[i] = row_fn(values[i], point);
    };
    const int workers = std::min<int>(g_sweep_threads.load(),
                                      static_cast<int>(values.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < values.size(); ++i) eval(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::atomic<bool> failed{false};
        std::exception_ptr first_error;
        std::mutex error_lock;
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++;
                     i < values.size() && !failed.load(); i = next++) {
                    try {
                        eval(i);
                    } catch (...) {
                        std::lock_guard<std::mutex> guard(error_lock);
                        if (!first_error)
                            first_error = std::current_exception();
                        failed.store(true);
                    }
                }
            });
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }
    for (auto& row : rows) table.add_row(std::move(row));
    return table;
}

}  // namespace

void set_sweep_threads(int n) { g_sweep_threads.store(std::max(1, n)); }

int sweep_threads() { return g_sweep_threads.load(); }

ResultTable run_qfi(const ScenarioConfig& config) {
    const std::string param =
        config.sweep ? config.sweep->parameter : "index";
    return sweep_rows(
        config,
        {param, "qfi_numerical", "qfi_closed_form", "vacuum_term",
         "bright_term", "sql", "advantage_precision", "qcrb_variance"},
        [](double value, const ScenarioConfig& point) {
            const double nu = static_cast<double>(point.nu);
            const QfiReport rep =
                point.mode == ChannelMode::birefringence
                    ? qfi_closed_form_birefringence(point.probe, point.sample,
                                                    0.0, nu)
                    : qfi_report_dichroism(point.probe, point.sample, nu);
            return std::vector<double>{value,
                                       rep.qfi_numerical,
                                       rep.qfi_closed_form,
                                       rep.vacuum_term,
                                       rep.bright_term,
                                       rep.sql,
                                       rep.advantage_precision,
                                       rep.qcrb_variance};
        });
}

ResultTable run_fig2() {
    ResultTable table;
    table.columns = {"s", "eta", "enhancement"};
    const double etas[] = {1.0, 0.95, 0.9, 0.8};
    for (double eta : etas)
        for (int i = 0; i <= 180; ++i) {
            const double s = i * 0.01;
            table.add_row({s, eta, dilute_precision_enhancement(s, eta)});
        }
    return table;
}

SucroseReport run_sucrose(double s, double eta, double alpha_sq) {
    SucroseReport rep;
    rep.squeezing = s;
    rep.eta = eta;

    ChiralSample sample;
    sample.concentration = 0.01;  // 1% w/w aqueous solution
    sample.concentration_unit = ConcentrationUnit::grams_per_cm3;
    sample.path_length = 1.0;
    sample.path_length_unit = PathLengthUnit::centimeters;
    sample.rotatory_power = 1.16;
    sample.efficiency = eta;

    rep.alpha_abs = std::sqrt(alpha_sq);
    rep.delta_phi = phases_from_sample(sample).delta_phi();
    rep.slope = sample.rotatory_power * sample.path_length_dm();

    const ProbeSpec coherent{ProbeFamily::polarization_squeezed,
                             complexd(rep.alpha_abs, 0.0), 0.0, 0.0};
    const QfiReport base = qfi_closed_form_birefringence(coherent, sample);
    rep.coherent_dc_over_c =
        1.0 / (std::sqrt(base.sql) * sample.concentration);
    rep.precision_ratio = dilute_precision_enhancement(s, eta);
    rep.squeezed_dc_over_c = rep.coherent_dc_over_c / rep.precision_ratio;
    rep.coherent_deviation_factor =
        rep.coherent_dc_over_c / rep.published_coherent;
    return rep;
}

std::string SucroseReport::to_text() const {
    std::string out;
    out += "sucrose scenario: delta_gamma = 1.16 rad cm^3 g^-1 dm^-1, "
           "C = 0.01 g/cm3, l = 1 cm\n";
    out += strf("  unit audit: |alpha| = %.12g, delta_phi = %.12g rad, "
                "delta_gamma*l = %.12g (dm), eta = %.12g\n",
                alpha_abs, delta_phi, slope, eta);
    out += strf("  coherent probe:       dC/C = %.6g   (published reference "
                "%.3g, factor %.4g)\n",
                coherent_dc_over_c, published_coherent,
                coherent_deviation_factor);
    out += strf("  squeezed probe s=%.3g: dC/C = %.6g   (published reference "
                "%.3g)\n",
                squeezing, squeezed_dc_over_c, published_squeezed);
    out += strf("  precision ratio (coherent/squeezed) = %.6f\n",
                precision_ratio);
    out += "  note: the absolute scale differs from the published reference "
           "by a\n  constant factor under the documented unit contract; the "
           "ratio is the\n  contracted quantity and the absolutes are "
           "reported, never tuned.\n";
    return out;
}

ResultTable SucroseReport::to_table() const {
    ResultTable table;
    table.columns = {"alpha_abs",
                     "delta_phi",
                     "slope",
                     "squeezing",
                     "eta",
                     "coherent_dc_over_c",
                     "squeezed_dc_over_c",
                     "precision_ratio",
                     "published_coherent",
                     "published_squeezed",
                     "coherent_deviation_factor"};
    table.add_row({alpha_abs, delta_phi, slope, squeezing, eta,
                   coherent_dc_over_c, squeezed_dc_over_c, precision_ratio,
                   published_coherent, published_squeezed,
                   coherent_deviation_factor});
    return table;
}

ResultTable run_dichroism(const ScenarioConfig& config) {
    if (config.mode != ChannelMode::dichroism)
        throw std::invalid_argument(
            "run_dichroism requires channel.mode = dichroism");
    const std::string param =
        config.sweep ? config.sweep->parameter : "index";
    return sweep_rows(
        config,
        {param, "T_L", "T_R", "var_over_beta", "coherent_var_over_beta",
         "precision_ratio"},
        [](double value, const ScenarioConfig& point) {
            const auto trans = transmissions_from_sample(point.sample);
            if (trans.degenerate)
                throw std::runtime_error(
                    "opaque arm: transmissions must stay positive");
            const double eta = point.sample.efficiency;
            if (eta <= 0.0)
                throw std::runtime_error("channel.eta must be positive here");
            const double s = point.probe.s;
            const double theta_eff =
                point.probe.theta - 2.0 * std::arg(point.probe.alpha);
            const double squeeze_part =
                2.0 * (2.0 * std::sinh(s) * std::sinh(s) -
                       std::cos(theta_eff) * std::sinh(2.0 * s));
            const double shot =
                1.0 / (eta * trans.T_L) + 1.0 / (eta * trans.T_R);
            const double bracket = shot + squeeze_part;
            return std::vector<double>{value,
                                       trans.T_L,
                                       trans.T_R,
                                       bracket,
                                       shot,
                                       std::sqrt(shot / bracket)};
        });
}

ResultTable run_simulate(const ScenarioConfig& config) {
    const ExperimentPlan plan = plan_from_config(config);
    const EstimationResult res = run_experiment(plan);
    const CrbVerdict verdict = crb_verdict(res);
    ResultTable table;
    table.columns = {"trials",
                     "used_trials",
                     "empirical_mean",
                     "pooled_estimate",
                     "bias",
                     "empirical_variance",
                     "variance_se",
                     "predicted_variance",
                     "qcrb_variance",
                     "ccrb_variance",
                     "above_qcrb",
                     "saturates_ccrb"};
    table.add_row({static_cast<double>(res.trials),
                   static_cast<double>(res.used_trials), res.empirical_mean,
                   res.pooled_estimate, res.bias, res.empirical_variance,
                   res.variance_se, res.predicted_variance, res.qcrb_variance,
                   res.ccrb_variance, verdict.above_qcrb ? 1.0 : 0.0,
                   verdict.saturates_ccrb ? 1.0 : 0.0});
    return table;
}

bool ValidationReport::passed() const {
    if (verdicts.size() != 3) return false;
    for (const auto& v : verdicts)
        if (v.evidence.size() < 3) return false;
    for (const auto& c : oracle_checks)
        if (!c.pass) return false;
    for (const auto& c : mc_checks)
        if (!c.within_prediction || !c.above_qcrb) return false;
    return true;
}

std::string ValidationReport::to_text() const {
    std::string out = "== oracle cross-validation ==\n";
    for (const auto& c : oracle_checks)
        out += strf("  [%s] %s: engine=%.9g oracle=%.9g rel_dev=%.3e\n",
                    c.pass ? "ok" : "FAIL", c.label.c_str(), c.engine,
                    c.oracle, c.rel_dev);
    out += "== monte carlo crb suite ==\n";
    for (const auto& c : mc_checks)
        out += strf("  [%s] %s: empirical=%.6g predicted=%.6g rel_dev=%.3e "
                    "qcrb=%.6g %s\n",
                    c.within_prediction && c.above_qcrb ? "ok" : "FAIL",
                    c.label.c_str(), c.empirical, c.predicted, c.rel_dev,
                    c.qcrb,
                    c.above_qcrb ? "bound respected" : "BOUND VIOLATED");
    out += "== arbitration report ==\n";
    for (const auto& v : verdicts) {
        out += "  tension: " + v.tension + "\n";
        out += "  verdict: " + v.verdict + "\n";
        for (const auto& e : v.evidence) out += "    - " + e + "\n";
    }
    out += passed() ? "VERDICT: bounds respected on every point\n"
                    : "VERDICT: violation detected\n";
    return out;
}

ValidationReport run_validate() {
    ValidationReport report;

    // Oracle grid (small scale).
    struct RotationPoint {
        complexd alpha;
        double s, theta, eta, dphi;
    };
    const RotationPoint rotation_grid[] = {
        {complexd(1.0, 0.0), 0.0, 0.0, 1.0, 0.2},
        {complexd(1.0, 0.0), 0.2, 0.0, 1.0, 0.2},
        {complexd(1.0, 0.0), 0.2, 0.0, 0.7, 0.2},
        {complexd(0.8, 0.3), 0.4, 0.5, 0.7, std::numbers::pi / 2},
    };
    for (const auto& p : rotation_grid) {
        const ProbeSpec probe{ProbeFamily::polarization_squeezed, p.alpha,
                              p.s, p.theta};
        const ChiralSample sample = rotation_point(p.dphi, p.eta);
        OracleCheck check;
        check.label = strf("rotation |alpha|=%.3g s=%.3g theta=%.3g eta=%.3g "
                           "dphi=%.3g",
                           std::abs(p.alpha), p.s, p.theta, p.eta, p.dphi);
        check.engine =
            qfi_closed_form_birefringence(probe, sample).qfi_numerical;
        check.oracle = oracle_qfi_birefringence(probe, sample).qfi;
        check.rel_dev = std::abs(check.oracle / check.engine - 1.0);
        check.pass = check.rel_dev <= 0.01;
        report.oracle_checks.push_back(check);
    }
    {
        const ProbeSpec probe{ProbeFamily::twin_amplitude_squeezed,
                              complexd(1.2, 0.0), 0.3, 0.0};
        const ChiralSample sample = absorber_point(0.8, 0.9, 0.9);
        OracleCheck check;
        check.label = "attenuation |alpha|=1.2 s=0.3 T=(0.8,0.9) eta=0.9";
        check.engine = qfi_report_dichroism(probe, sample).qfi_numerical;
        check.oracle = oracle_qfi_dichroism(probe, sample).qfi;
        check.rel_dev = std::abs(check.oracle / check.engine - 1.0);
        check.pass = check.rel_dev <= 0.01;
        report.oracle_checks.push_back(check);
    }

    // Monte Carlo CRB suite at nu = 1e5.
    struct McPlanSpec {
        std::string label;
        ExperimentPlan plan;
    };
    std::vector<McPlanSpec> plans;
    for (const auto& [label, s, eta, seed] :
         {std::tuple<const char*, double, double, std::uint64_t>{
              "balanced s=0 optimal xi", 0.0, 1.0, 101},
          {"balanced s=0.8 optimal xi", 0.8, 0.9, 102}}) {
        ExperimentPlan plan;
        plan.probe = {ProbeFamily::polarization_squeezed,
                      complexd(100.0, 0.0), s, 0.0};
        plan.sample = rotation_point(0.3, eta);
        plan.scheme = MeasurementScheme::balanced_difference;
        plan.xi = optimal_waveplate_angle(0.3);
        plan.trials = 100000;
        plan.seed = seed;
        plans.push_back({label, plan});
    }
    for (const auto& [label, s, seed] :
         {std::tuple<const char*, double, std::uint64_t>{
              "ratio s=0 T~0.9", 0.0, 103},
          {"ratio s=1 T~0.9", 1.0, 104}}) {
        ExperimentPlan plan;
        plan.probe = {ProbeFamily::twin_amplitude_squeezed,
                      complexd(200.0, 0.0), s, 0.0};
        plan.sample = absorber_point(0.9, 0.92, 1.0);
        plan.scheme = MeasurementScheme::intensity_ratio;
        plan.trials = 100000;
        plan.seed = seed;
        plans.push_back({label, plan});
    }
    for (const auto& spec : plans) {
        const EstimationResult res = run_experiment(spec.plan);
        const CrbVerdict verdict = crb_verdict(res);
        McCheck check;
        check.label = spec.label;
        check.empirical = res.empirical_variance;
        check.predicted = res.predicted_variance;
        check.rel_dev = std::abs(res.empirical_variance /
                                     res.predicted_variance -
                                 1.0);
        check.qcrb = res.qcrb_variance;
        check.within_prediction = check.rel_dev <= 0.05;
        check.above_qcrb = verdict.above_qcrb;
        report.mc_checks.push_back(check);
    }

    // Tension 1: closed-form bright term (|sin dphi| coupling plus
    // probe-independent vacuum term) vs measurement-based value at
    // dphi -> 0.
    {
        ArbitrationVerdict v;
        v.tension =
            "rotation QFI at dphi -> 0: closed-form report vs "
            "measurement-based precision (factor-2 tension)";
        bool meas_matches = true;
        for (double s : {0.3, 0.5, 0.8}) {
            const ProbeSpec probe{ProbeFamily::polarization_squeezed,
                                  complexd(1.0, 0.0), s, 0.0};
            const ChiralSample sample = rotation_point(0.0, 1.0);
            const double oracle =
                oracle_qfi_birefringence(probe, sample, 0.0, 48).qfi;
            const QfiReport rep = qfi_closed_form_birefringence(probe, sample);
            const MeasurementStats stats = balanced_detection_stats(
                probe, sample, optimal_waveplate_angle(0.0));
            const double dev_meas =
                std::abs(oracle / stats.cfi_gaussian - 1.0);
            const double dev_closed = rep.qfi_closed_form / oracle - 1.0;
            meas_matches = meas_matches && dev_meas <= 0.01;
            v.evidence.push_back(
                strf("s=%.1f: oracle=%.6g, measurement-based=%.6g "
                     "(rel dev %.2e), closed-form=%.6g (off by %+.1f%%)",
                     s, oracle, stats.cfi_gaussian, dev_meas,
                     rep.qfi_closed_form, 100.0 * dev_closed));
        }
        {
            const ProbeSpec probe{ProbeFamily::polarization_squeezed,
                                  complexd(0.0, 0.0), 0.3, 0.0};
            const ChiralSample sample = rotation_point(0.2, 1.0);
            const double oracle = oracle_qfi_birefringence(probe, sample).qfi;
            const QfiReport rep = qfi_closed_form_birefringence(probe, sample);
            v.evidence.push_back(strf(
                "alpha=0, s=0.3: oracle=%.3e vs closed-form vacuum term "
                "%.6g: the probe family is constant, so the vacuum term is "
                "not part of this family's information",
                oracle, rep.vacuum_term));
        }
        v.verdict =
            meas_matches
                ? "the general formula and the number-state oracle match the "
                  "measurement-based value (bright term with cos theta_eff "
                  "coupling; e^{2s}|alpha|^2 l^2 dg^2 at eta=1, theta_eff=0); "
                  "the closed-form report's |sin dphi| bright term and its "
                  "probe-independent vacuum term do not describe this family "
                  "at dphi -> 0"
                : "inconclusive: oracle and measurement-based values "
                  "disagree beyond 1%";
        report.verdicts.push_back(v);
    }

    // Tension 2: printed lossy displacement term (|alpha|^4 with the loss
    // bracket as a product) vs the general formula.
    {
        ArbitrationVerdict v;
        v.tension =
            "lossy displacement term: printed |alpha|^4 product form vs "
            "general formula";
        bool engine_matches = true;
        bool printed_off = true;
        struct LossyPoint {
            double alpha, s, eta, dphi;
        };
        for (const auto& p : {LossyPoint{0.8, 0.3, 0.7, 0.2},
                              LossyPoint{0.8, 0.5, 0.7, 0.2},
                              LossyPoint{1.2, 0.3, 0.5, 0.4}}) {
            const ProbeSpec probe{ProbeFamily::polarization_squeezed,
                                  complexd(p.alpha, 0.0), p.s, 0.0};
            const ChiralSample sample = rotation_point(p.dphi, p.eta);
            const double oracle = oracle_qfi_birefringence(probe, sample).qfi;
            const double engine =
                qfi_closed_form_birefringence(probe, sample).qfi_numerical;
            const double printed =
                p.eta * std::pow(p.alpha, 4) *
                (1.0 - p.eta + p.eta * std::cosh(2.0 * p.s) +
                 p.eta * std::abs(std::sin(p.dphi)) * std::sinh(2.0 * p.s));
            const double dev_engine = std::abs(oracle / engine - 1.0);
            const double dev_printed = printed / oracle - 1.0;
            engine_matches = engine_matches && dev_engine <= 0.01;
            printed_off = printed_off && std::abs(dev_printed) > 0.05;
            v.evidence.push_back(strf(
                "|alpha|=%.2g s=%.2g eta=%.2g dphi=%.2g: oracle=%.6g, "
                "general=%.6g (rel dev %.2e), as-printed=%.6g (off by "
                "%+.1f%%)",
                p.alpha, p.s, p.eta, p.dphi, oracle, engine, dev_engine,
                printed, 100.0 * dev_printed));
        }
        v.verdict = engine_matches && printed_off
                        ? "the printed lossy displacement expression "
                          "disagrees with oracle and general formula at "
                          "every checked point (suspected misprint: "
                          "amplitude power and loss bracket); the general "
                          "formula, eta|alpha|^2 l^2 dg^2 (D + eta cos "
                          "theta_eff sinh 2s)/(D^2 - eta^2 sinh^2 2s) with "
                          "D = 1 - eta + eta cosh 2s, is authoritative"
                        : "inconclusive: see evidence lines";
        report.verdicts.push_back(v);
    }

    // Tension 3: whether the enhancement figure includes the vacuum term.
    {
        ArbitrationVerdict v;
        v.tension =
            "enhancement sweep: vacuum-term inclusion at bright settings";
        double worst = 0.0;
        struct BrightPoint {
            double alpha_sq, eta;
        };
        for (const auto& p :
             {BrightPoint{750.0, 1.0}, BrightPoint{1e9, 1.0},
              BrightPoint{1e9, 0.9}}) {
            const ProbeSpec probe{ProbeFamily::polarization_squeezed,
                                  complexd(std::sqrt(p.alpha_sq), 0.0), 1.73,
                                  0.0};
            const ChiralSample sample = rotation_point(1e-9, p.eta);
            const QfiReport rep = qfi_closed_form_birefringence(probe, sample);
            const double with_vacuum =
                std::sqrt((rep.bright_term + rep.vacuum_term) / rep.sql);
            const double without_vacuum = std::sqrt(rep.bright_term / rep.sql);
            const double rel = with_vacuum / without_vacuum - 1.0;
            if (p.alpha_sq >= 1e6) worst = std::max(worst, rel);
            v.evidence.push_back(
                strf("|alpha|^2=%.3g eta=%.3g s=1.73: enhancement %.6f with "
                     "vacuum term, %.6f without (rel %.2e)",
                     p.alpha_sq, p.eta, with_vacuum, without_vacuum, rel));
        }
        v.verdict = strf(
            "the vacuum term is negligible at the stated bright operating "
            "point (relative shift %.1e at |alpha|^2 = 1e9) and is treated "
            "as such in the enhancement figure; the qfi table reports "
            "vacuum and bright terms separately so either convention can "
            "be formed",
            worst);
        report.verdicts.push_back(v);
    }

    return report;
}

}  // namespace chiralmet
