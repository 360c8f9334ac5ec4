// Command-line front end: certify / simulate / roa / lemma-check / compare-windup.
//
// Exit codes: 0 success, 1 domain errors (divergence, failed assumptions,
// failed certification), 2 usage errors (bad flags, unknown plant, malformed
// grid, reference outside the computed output range).

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "satint/io.hpp"

namespace {

using namespace satint;

struct CommonOpts {
    std::string plant = "linear1d";
    std::optional<double> umin;
    std::optional<double> umax;
    int grid_size = 201;
    std::uint64_t seed = 1;
    int threads = 0;  // 0 = machine parallelism
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--plant", opts.plant, "builtin plant name or JSON config path");
    cmd->add_option("--umin", opts.umin, "override the lower input bound");
    cmd->add_option("--umax", opts.umax, "override the upper input bound");
    cmd->add_option("--grid-size", opts.grid_size, "equilibrium continuation grid size")
        ->check(CLI::Range(2, 100000));
    cmd->add_option("--seed", opts.seed, "seed for all stochastic sampling");
    cmd->add_option("--threads", opts.threads, "parallelism cap (0 = machine parallelism)");
}

struct Pipeline {
    PlantSetup setup;
    EquilibriumMap map;
};

/// Loads the plant and builds the equilibrium map; the early validation that
/// needs the computed output range happens right after this.
Pipeline build_pipeline(const CommonOpts& opts) {
    PlantSetup setup = load_plant(opts.plant);
    if (opts.umin || opts.umax) {
        setup.range = SaturatorSpec(opts.umin.value_or(setup.range.u_min),
                                    opts.umax.value_or(setup.range.u_max));
    }
    EquilibriumMap map = EquilibriumMap::build(setup.plant, setup.range, opts.grid_size);
    if (map.branch_jump_suspected()) {
        std::fprintf(stderr,
                     "warning: equilibrium continuation took a disproportionate step; "
                     "a fold/branch jump is likely and the Lipschitz assumption may fail\n");
    }
    return Pipeline{std::move(setup), std::move(map)};
}

Eigen::VectorXd parse_x0(const std::string& text, int n) {
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
    if (text.empty()) return x0;
    std::stringstream ss(text);
    std::string part;
    int i = 0;
    while (std::getline(ss, part, ',')) {
        if (i >= n) throw InvalidArgument("--x0 has more than " + std::to_string(n) + " entries");
        char* end = nullptr;
        x0[i] = std::strtod(part.c_str(), &end);
        if (end == part.c_str()) throw InvalidArgument("bad --x0 entry '" + part + "'");
        ++i;
    }
    if (i != n) throw InvalidArgument("--x0 needs " + std::to_string(n) + " entries");
    return x0;
}

StabilityCertificate certify_stage(const Pipeline& pipe, const CommonOpts& common,
                                   CertifyOptions copts) {
    copts.seed = common.seed;
    copts.threads = common.threads;
    return certify_exponential_stability(pipe.setup.plant, pipe.map, pipe.setup.range, copts);
}

GainCertificate constants_stage(const Pipeline& pipe, const StabilityCertificate& cert,
                                int samples, std::uint64_t seed) {
    const TubeW tube(pipe.map, cert);
    const LipschitzEstimates lip =
        estimate_lipschitz(pipe.setup.plant, tube, pipe.setup.range, samples, seed);
    return compute_constants(cert, lip, pipe.map.alpha(), pipe.map.mu());
}

void print_constants(const GainCertificate& gc) {
    std::printf("sampled certificate (probe-based estimates, not a proof)\n");
    std::printf("  %-14s %s\n", "m", fmt_g12(gc.m).c_str());
    std::printf("  %-14s %s\n", "lambda", fmt_g12(gc.lambda).c_str());
    std::printf("  %-14s %s\n", "eps0", fmt_g12(gc.eps0).c_str());
    std::printf("  %-14s %s\n", "alpha", fmt_g12(gc.alpha).c_str());
    std::printf("  %-14s %s\n", "mu", fmt_g12(gc.mu).c_str());
    std::printf("  %-14s %s\n", "L1", fmt_g12(gc.L1).c_str());
    std::printf("  %-14s %s\n", "L2", fmt_g12(gc.L2).c_str());
    std::printf("  %-14s %s\n", "delta_g", fmt_g12(gc.delta_g).c_str());
    std::printf("  %-14s %s\n", "W_radius", fmt_g12(gc.W_radius).c_str());
    std::printf("  %-14s %s\n", "T", fmt_g12(gc.T).c_str());
    std::printf("  %-14s %s\n", "kappa", fmt_g12(gc.kappa).c_str());
    std::printf("  %-14s %s\n", "lambda_tilde", fmt_g12(gc.lambda_tilde).c_str());
    std::printf("  %-14s %s\n", "k_max", fmt_g12(gc.k_max).c_str());
}

int run_certify(const CommonOpts& common, const CertifyOptions& copts, int samples,
                const std::string& out_prefix) {
    const Pipeline pipe = build_pipeline(common);
    const StabilityCertificate cert = certify_stage(pipe, common, copts);
    const GainCertificate gc = constants_stage(pipe, cert, samples, common.seed);

    write_equilibrium_csv(out_prefix + "_map.csv", pipe.map);
    write_evidence_csv(out_prefix + "_evidence.csv", cert);
    write_constants_json(out_prefix + "_constants.json", gc);

    std::printf("plant: %s  (n=%d, u in [%s, %s])\n", pipe.setup.plant.name.c_str(),
                pipe.setup.plant.n, fmt_g12(pipe.setup.range.u_min).c_str(),
                fmt_g12(pipe.setup.range.u_max).c_str());
    std::printf("spectral abscissa bound lambda0 = %s\n", fmt_g12(cert.lambda0).c_str());
    print_constants(gc);
    std::printf("wrote %s_map.csv, %s_evidence.csv, %s_constants.json\n", out_prefix.c_str(),
                out_prefix.c_str(), out_prefix.c_str());
    return 0;
}

int run_simulate(const CommonOpts& common, double k, double r, const std::string& x0_text,
                 double u0, double dt, double horizon, int record_stride,
                 const std::string& out) {
    const Pipeline pipe = build_pipeline(common);
    const double u_r = pipe.map.invert_reference(r);  // early range check

    ClosedLoopConfig cfg(pipe.setup.plant, pipe.setup.range, k, r,
                         parse_x0(x0_text, pipe.setup.plant.n), u0);
    cfg.dt = dt;
    cfg.horizon = horizon;
    cfg.record_stride = record_stride;
    const std::vector<ClosedLoopRecord> records = simulate_closed_loop(cfg, pipe.map);
    write_trajectory_csv(out, records, pipe.setup.plant.n);

    const TrackingMetrics metrics = tracking_metrics(records, r, u_r, 1e-3);
    std::printf("simulated %zu records over horizon %s\n", records.size(),
                fmt_g12(horizon).c_str());
    std::printf("  final |y - r| = %s\n", fmt_g12(metrics.final_error).c_str());
    std::printf("  settle time (|y-r| <= 1e-3): %s\n", fmt_g12(metrics.settle_time).c_str());
    std::printf("  overshoot: %s, max |u - u_r|: %s\n", fmt_g12(metrics.overshoot).c_str(),
                fmt_g12(metrics.u_excursion).c_str());
    std::printf("wrote %s\n", out.c_str());
    return 0;
}

int run_roa(const CommonOpts& common, double T_roa, const std::string& grid_text,
            std::optional<double> r_opt, double k_start, double dt, const std::string& out,
            const std::string& gain_out) {
    const Pipeline pipe = build_pipeline(common);
    const RoaGrid grid = parse_grid_spec(grid_text, pipe.setup.plant.n);
    const double r = r_opt.value_or(0.5 * (pipe.map.y_min() + pipe.map.y_max()));
    pipe.map.invert_reference(r);  // early range check

    CertifyOptions copts;
    const StabilityCertificate cert = certify_stage(pipe, common, copts);
    const GainCertificate gc = constants_stage(pipe, cert, 2000, common.seed);

    XtSampleOptions sopts;
    sopts.dt = dt;
    sopts.threads = common.threads;
    XtSampleResult result = sample_XT(pipe.setup.plant, pipe.map, cert, T_roa, grid, sopts);
    std::printf(
        "grid nodes: %zu, members of X_T: %d, members of X_2T: %d, nesting violations: %d\n",
        result.samples.size(), result.members, result.members_2T, result.nesting_violations);

    if (result.members > 0) {
        GainSelectionOptions gopts;
        gopts.dt = dt;
        gopts.T_roa = T_roa;
        gopts.threads = common.threads;
        const GainSelection selection = select_gain_empirical(
            pipe.setup.plant, pipe.map, cert, result.samples, r, k_start, gc.k_max, gopts);
        std::printf("gain selection\n");
        std::printf("  empirical k_T   = %s  (measured: all %d members converge under it)\n",
                    fmt_g12(selection.k_emp).c_str(), selection.members_tested);
        std::printf("  certified k_max = %s  (sampled-certificate bound)\n",
                    fmt_g12(selection.k_cert).c_str());
        if (!gain_out.empty()) write_json(gain_out, gain_selection_to_json(selection));
    } else {
        std::printf("no members: skipping gain selection\n");
    }
    write_roa_csv(out, result.samples, pipe.setup.plant.n);
    std::printf("wrote %s\n", out.c_str());
    return 0;
}

int run_lemma_check(const CommonOpts& common, const std::string& lemma, int instances, double dt,
                    double k, double kappa_scale, const std::string& out) {
    const Pipeline pipe = build_pipeline(common);
    CertifyOptions copts;
    const StabilityCertificate cert = certify_stage(pipe, common, copts);
    const GainCertificate gc = constants_stage(pipe, cert, 2000, common.seed);

    HarnessOptions opts;
    opts.n_instances = instances;
    opts.seed = common.seed;
    opts.dt = dt;
    opts.k = k;
    opts.kappa_scale = kappa_scale;
    opts.threads = common.threads;

    LemmaReport report;
    if (lemma == "slow-input") {
        report = check_slow_input_lemma(pipe.setup.plant, pipe.map, cert, gc, opts);
    } else if (lemma == "tube") {
        report = check_tube_lemma(pipe.setup.plant, pipe.map, cert, gc, opts);
    } else if (lemma == "sample-hold") {
        report = check_sample_hold_lemma(pipe.setup.plant, pipe.map, cert, gc, opts);
    } else if (lemma == "gain") {
        report = check_gain_lemma(pipe.setup.plant, pipe.map, cert, gc, opts);
    } else {
        throw InvalidArgument("unknown lemma '" + lemma +
                              "' (want slow-input|tube|sample-hold|gain)");
    }
    write_lemma_report_json(out, report);
    std::printf("%s: %d instances, %d violations, %d marginal, worst margin %s\n",
                report.lemma_id.c_str(), report.instances, report.violations, report.marginal,
                fmt_g12(report.worst_margin).c_str());
    if (report.lemma_id == "gain" && !report.contraction_checked) {
        std::printf("  output-gap contraction skipped: the certified gain is too small to watch "
                    "within the horizon cap\n");
    }
    std::printf("%s\n", report.disclaimer.c_str());
    std::printf("wrote %s\n", out.c_str());
    return 0;
}

int run_compare_windup(const CommonOpts& common, double k, double r, double fault_on,
                       double fault_off, double offset, const std::string& x0_text,
                       std::optional<double> u0_opt, double dt, double horizon,
                       const std::string& out) {
    const Pipeline pipe = build_pipeline(common);
    const double u_r = pipe.map.invert_reference(r);  // early range check

    // Default start: the interconnection equilibrium, so the fault is the only event.
    Eigen::VectorXd x0 = x0_text.empty() ? Eigen::VectorXd(pipe.map.xi(u_r))
                                         : parse_x0(x0_text, pipe.setup.plant.n);
    const double u0 = u0_opt.value_or(u_r);

    ClosedLoopConfig cfg(pipe.setup.plant, pipe.setup.range, k, r, x0, u0);
    cfg.dt = dt;
    cfg.horizon = horizon;
    cfg.record_stride = 10;
    const double tol = 1e-3 * (pipe.map.y_max() - pipe.map.y_min());
    const WindupComparison cmp =
        compare_windup(cfg, pipe.map, FaultWindow{fault_on, fault_off, offset}, tol);

    write_json(out, windup_to_json(cmp));
    std::printf("fault [%s, %s) with measured-output offset %s\n", fmt_g12(fault_on).c_str(),
                fmt_g12(fault_off).c_str(), fmt_g12(offset).c_str());
    std::printf("  saturating integrator: recovery %s, drive range [%s, %s]\n",
                fmt_g12(cmp.saturating.recovery_time).c_str(),
                fmt_g12(cmp.saturating.drive_min).c_str(),
                fmt_g12(cmp.saturating.drive_max).c_str());
    std::printf("  clamped-output integrator: recovery %s, drive range [%s, %s]\n",
                fmt_g12(cmp.clamped.recovery_time).c_str(),
                fmt_g12(cmp.clamped.drive_min).c_str(), fmt_g12(cmp.clamped.drive_max).c_str());
    std::printf("wrote %s\n", out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"saturating-integrator feedback controller toolbox"};
    app.require_subcommand(1);

    // certify
    CommonOpts certify_common;
    CertifyOptions copts;
    int samples = 2000;
    std::string out_prefix = "certify";
    CLI::App* certify = app.add_subcommand("certify", "build the equilibrium map and constants");
    add_common(certify, certify_common);
    certify->add_option("--n-u", copts.n_u, "equilibria probed for the decay envelope");
    certify->add_option("--n-dirs", copts.n_dirs, "random perturbation directions per equilibrium");
    certify->add_option("--radius-scale", copts.radius_scale, "scales the candidate radii");
    certify->add_option("--probe-dt", copts.dt, "probe integration step");
    certify->add_option("--samples", samples, "Lipschitz sampling count");
    certify->add_option("--out-prefix", out_prefix, "prefix for map/evidence/constants artifacts");

    // simulate
    CommonOpts sim_common;
    double sim_k = 0.1, sim_r = 0.5, sim_u0 = 0.0, sim_dt = 1e-3, sim_horizon = 100.0;
    int sim_stride = 1;
    std::string sim_x0, sim_out = "traj.csv";
    CLI::App* simulate = app.add_subcommand("simulate", "run the closed loop and export a CSV");
    add_common(simulate, sim_common);
    simulate->add_option("--k", sim_k, "feedback gain")->required();
    simulate->add_option("--r", sim_r, "reference value")->required();
    simulate->add_option("--x0", sim_x0, "initial plant state, comma separated (default zeros)");
    simulate->add_option("--u0", sim_u0, "initial integrator state");
    simulate->add_option("--dt", sim_dt, "integration step");
    simulate->add_option("--horizon", sim_horizon, "simulation horizon");
    simulate->add_option("--record-stride", sim_stride, "keep every n-th step in the CSV");
    simulate->add_option("--out", sim_out, "trajectory CSV path");

    // roa
    CommonOpts roa_common;
    double roa_T = 3.0, roa_kstart = 1.0, roa_dt = 1e-2;
    std::optional<double> roa_r;
    std::string roa_grid, roa_out = "roa.csv", roa_gain_out = "gain_selection.json";
    CLI::App* roa = app.add_subcommand("roa", "sample X_T membership and select a working gain");
    add_common(roa, roa_common);
    roa->add_option("--T", roa_T, "constant-input horizon defining X_T");
    roa->add_option("--grid", roa_grid, "grid spec x1:lo:hi:n,...,u:lo:hi:n")->required();
    roa->add_option("--k-start", roa_kstart, "starting gain for the halving search");
    roa->add_option("--r", roa_r, "reference (default: midpoint of the output range)");
    roa->add_option("--dt", roa_dt, "integration step");
    roa->add_option("--out", roa_out, "membership CSV path");
    roa->add_option("--gain-out", roa_gain_out, "gain selection JSON path");

    // lemma-check
    CommonOpts lemma_common;
    std::string lemma_name = "slow-input", lemma_out = "lemma_report.json";
    int lemma_instances = 100;
    double lemma_dt = 1e-2, lemma_k = -1.0, lemma_kappa_scale = 1.0;
    CLI::App* lemma = app.add_subcommand("lemma-check", "falsification harness for the lemmas");
    add_common(lemma, lemma_common);
    lemma->add_option("--lemma", lemma_name, "slow-input|tube|sample-hold|gain")->required();
    lemma->add_option("--instances", lemma_instances, "sampled instances");
    lemma->add_option("--dt", lemma_dt, "integration step");
    lemma->add_option("--k", lemma_k, "gain-lemma gain (default k_max/2)");
    lemma->add_option("--kappa-scale", lemma_kappa_scale,
                      "scale the slew hypothesis (1000 breaks it on purpose)");
    lemma->add_option("--out", lemma_out, "report JSON path");

    // compare-windup
    CommonOpts windup_common;
    double w_k = 0.1, w_r = 0.5, w_on = 5.0, w_off = 15.0, w_offset = 5.0, w_dt = 1e-3,
           w_horizon = 300.0;
    std::optional<double> w_u0;
    std::string w_x0, w_out = "windup.json";
    CLI::App* windup = app.add_subcommand(
        "compare-windup", "saturating vs clamped-output integrator under a measurement fault");
    add_common(windup, windup_common);
    windup->add_option("--k", w_k, "feedback gain");
    windup->add_option("--r", w_r, "reference value");
    windup->add_option("--fault-on", w_on, "fault start time");
    windup->add_option("--fault-off", w_off, "fault end time");
    windup->add_option("--offset", w_offset, "measured-output offset during the fault");
    windup->add_option("--x0", w_x0, "initial plant state (default: equilibrium at u_r)");
    windup->add_option("--u0", w_u0, "initial integrator state (default: u_r)");
    windup->add_option("--dt", w_dt, "integration step");
    windup->add_option("--horizon", w_horizon, "simulation horizon");
    windup->add_option("--out", w_out, "metrics JSON path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (certify->parsed()) return run_certify(certify_common, copts, samples, out_prefix);
        if (simulate->parsed()) {
            return run_simulate(sim_common, sim_k, sim_r, sim_x0, sim_u0, sim_dt, sim_horizon,
                                sim_stride, sim_out);
        }
        if (roa->parsed()) {
            return run_roa(roa_common, roa_T, roa_grid, roa_r, roa_kstart, roa_dt, roa_out,
                           roa_gain_out);
        }
        if (lemma->parsed()) {
            return run_lemma_check(lemma_common, lemma_name, lemma_instances, lemma_dt, lemma_k,
                                   lemma_kappa_scale, lemma_out);
        }
        if (windup->parsed()) {
            return run_compare_windup(windup_common, w_k, w_r, w_on, w_off, w_offset, w_x0, w_u0,
                                      w_dt, w_horizon, w_out);
        }
    } catch (const ReferenceOutOfRange& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const InvalidArgument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
