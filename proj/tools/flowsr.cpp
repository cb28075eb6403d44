// flowsr command-line tool: simulate, degrade, super-resolve, evaluate, verify.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "flowsr/flowsr.hpp"
#include "flowsr/oracle_check.hpp"

namespace {

using namespace flowsr;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

/// Flag values that parse but are out of range.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Decimation parse_factor(const std::string& s) {
    const auto f = parse_triple("--factor", s);
    return {f[0], f[1], f[2]};
}

std::optional<double> parse_noise(const std::string& s) {
    if (s.empty() || s == "none")
        return std::nullopt;
    return parse_double("--noise-psnr", s);
}

/// Runs `validate` and maps library parameter errors to usage errors.
template <typename Fn>
auto checked(Fn&& validate) {
    try {
        return validate();
    } catch (const ParameterError& e) {
        throw UsageError(e.what());
    } catch (const ConfigurationError& e) {
        throw UsageError(e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) { io::write_text_atomic(path, text); }

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string phantom = "poiseuille";
    std::string dims = "64,64,64";
    std::size_t frames = 5;
    double venc = 150.0;
    double vmax = 100.0;
    double radius_fraction = 0.3;
    double magnitude_in = 1.0;
    double magnitude_out = 0.0;
    std::string out;
};

int run_simulate(const SimulateArgs& a) {
    const RunConfig cfg = checked([&] {
        RunConfig c;
        c.phantom = parse_phantom(a.phantom);
        c.dims = parse_triple("--dims", a.dims);
        c.frames = a.frames;
        c.venc = a.venc;
        c.vmax = a.vmax;
        c.radius_fraction = a.radius_fraction;
        c.magnitude_in = a.magnitude_in;
        c.magnitude_out = a.magnitude_out;
        c.factor = {1, 1, 1};
        validate(c);
        return c;
    });
    io::save(a.out, simulate(cfg));
    std::cout << "wrote " << a.out << " (" << phantom_name(cfg.phantom) << ", " << join(cfg.dims) << ", "
              << cfg.frames << " frames)\n";
    return 0;
}

struct DegradeArgs {
    std::string in, out;
    std::string factor = "4,4,4";
    std::string noise_psnr = "none";
    std::uint64_t seed = 1;
    std::string kernel = "ideal";
    std::string fwhm = "8,8,8";
};

int run_degrade(const DegradeArgs& a) {
    const DegradationConfig cfg = checked([&] {
        DegradationConfig c;
        c.d = parse_factor(a.factor);
        c.kernel.type = parse_kernel(a.kernel);
        c.kernel.fwhm = parse_real_triple("--fwhm", a.fwhm);
        c.noise_psnr_db = parse_noise(a.noise_psnr);
        c.rng_seed = a.seed;
        validate(c);
        return c;
    });
    const VelocityDataset hr = load_external(a.in);
    const auto result = degrade_dataset(hr, cfg);
    io::save(a.out, result.lr);
    write_text(a.out + ".cal", calibration_text(result.calibration, cfg));
    std::cout << "wrote " << a.out << " (" << to_string(result.lr.grid()) << ")";
    if (result.calibration.achieved_psnr_db)
        std::cout << ", sigma " << result.calibration.sigma << ", achieved PSNR " << *result.calibration.achieved_psnr_db
                  << " dB";
    std::cout << '\n';
    return 0;
}

struct SrArgs {
    std::string in, out, report;
    std::string method = "fsr";
    std::string factor = "4,4,4";
    double tau = kDefaultTau;
    std::string prior = "trilinear";
    std::string kernel = "ideal";
    std::string fwhm = "8,8,8";
};

int run_sr(const SrArgs& a) {
    struct Parsed {
        std::string method;
        Decimation d;
        KernelChoice kernel;
        PriorMode prior;
    };
    const Parsed p = checked([&] {
        Parsed q{a.method, parse_factor(a.factor), {parse_kernel(a.kernel), parse_real_triple("--fwhm", a.fwhm)},
                 parse_prior(a.prior)};
        if (q.method != "fsr")
            parse_interp(q.method);
        if (!(a.tau > 0.0))
            throw ParameterError("--tau must be > 0");
        return q;
    });
    const VelocityDataset lr = load_external(a.in);
    const Grid3 hr = upscale(lr.grid(), p.d);
    if (p.method == "fsr") {
        auto result = superresolve_dataset(lr, make_solver_config(hr, p.d, p.kernel, a.tau, p.prior), hr);
        io::save(a.out, result.hr);
        std::ostringstream csv;
        write_solve_csv(csv, result.reports);
        const std::string report = a.report.empty() ? a.out + ".solve.csv" : a.report;
        write_text(report, csv.str());
        std::cout << "wrote " << a.out << " and " << report << '\n';
    } else {
        io::save(a.out, upsample_dataset(lr, p.d, parse_interp(p.method)));
        std::cout << "wrote " << a.out << '\n';
    }
    return 0;
}

struct EvalArgs {
    std::string truth, sr, baseline, out;
    std::string sr_name = "fsr", baseline_name = "trilinear";
    std::string mask;
    double mask_threshold = 0.1;
    bool per_voxel = false;
};

int run_eval(const EvalArgs& a) {
    MaskConfig mask = checked([&] {
        MaskConfig m;
        m.threshold_fraction = a.mask_threshold;
        if (!(m.threshold_fraction > 0.0 && m.threshold_fraction < 1.0))
            throw ParameterError("--mask-threshold must be in (0, 1)");
        m.mre = a.per_voxel ? MreNormalization::per_voxel : MreNormalization::peak_speed;
        return m;
    });
    const VelocityDataset truth = load_external(a.truth);
    const VelocityDataset sr = load_external(a.sr);
    const VelocityDataset base = load_external(a.baseline);
    if (!a.mask.empty()) {
        // Any FLW4 file: voxels with nonzero frame-0 magnitude are in the mask.
        const VelocityDataset m = load_external(a.mask);
        FlowMask fm{m.grid(), std::vector<std::uint8_t>(m.grid().size())};
        for (std::size_t i = 0; i < fm.voxels.size(); ++i)
            fm.voxels[i] = m.frames[0].magnitude[i] != 0.0 ? 1 : 0;
        mask.external = std::move(fm);
    }
    const EvalReport report = evaluate(sr, truth, base, mask, a.sr_name, a.baseline_name);
    std::ostringstream csv;
    write_csv(csv, report);
    write_text(a.out, csv.str());
    std::cout << summary_table(report, {a.sr_name, a.baseline_name});
    return 0;
}

struct OracleArgs {
    std::string dims, factor;
    double tol = 1e-8;
    bool break_constant = false;
};

int run_oracle(const OracleArgs& a) {
    const auto cases = checked([&] {
        if (a.dims.empty() && a.factor.empty())
            return oracle::default_matrix();
        const auto dm = parse_triple("--dims", a.dims.empty() ? "8,8,8" : a.dims);
        const Grid3 g(dm[0], dm[1], dm[2]);
        const Decimation d = parse_factor(a.factor.empty() ? "2,2,2" : a.factor);
        decimate(g, d);
        if (g.size() > oracle::kMaxVoxels)
            throw ParameterError("--dims exceeds the dense oracle size guard");
        std::vector<oracle::CheckCase> out;
        for (KernelType k : {KernelType::ideal, KernelType::gaussian})
            for (double tau : {1e-3, 0.05, 1.0})
                out.push_back({g, d, k, tau});
        return out;
    });
    // The broken variant drops the factor d from the shift of the diagonal inverse.
    double shift = 1.0;
    if (a.break_constant)
        shift = 1.0 / double(cases.front().d.total());
    const auto summary = oracle::run_oracle_check(cases, a.tol, shift);
    for (const auto& r : summary.results) {
        std::printf("%-6s grid %-7s d %-6s kernel %-8s tau %-6g rel_err %.3e\n",
                    r.skipped ? "SKIP" : (r.relative_error <= a.tol ? "ok" : "FAIL"), to_string(r.config.hr).c_str(),
                    to_string(r.config.d).c_str(), kernel_name(r.config.kernel), r.config.tau, r.relative_error);
    }
    std::printf("max relative error %.3e (tolerance %.1e), %zu case(s), %.2f s: %s\n", summary.max_relative_error,
                a.tol, summary.results.size(), summary.seconds, summary.passed() ? "PASS" : "FAIL");
    return summary.passed() ? 0 : kExitRuntime;
}

struct PipelineArgs {
    std::string config;
    std::string out_dir;
    std::vector<std::string> overrides;
};

int run_pipeline_cmd(const PipelineArgs& a) {
    const RunConfig cfg = checked([&] {
        RunConfig c = a.config.empty() ? RunConfig{} : load_config(a.config);
        for (const auto& kv : a.overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw ParameterError("--set expects key=value, got '" + kv + "'");
            set_field(c, kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (!a.out_dir.empty())
            c.out_dir = a.out_dir;
        validate(c);
        return c;
    });
    const PipelineResult r = run_pipeline(cfg, true);
    std::cout << r.summary;
    if (r.calibration.achieved_psnr_db)
        std::printf("noise sigma %.6g, achieved PSNR %.3f dB\n", r.calibration.sigma, *r.calibration.achieved_psnr_db);
    std::printf("outputs in %s (%.2f s)\n", cfg.out_dir.c_str(), r.seconds);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Super-resolution and denoising of phase-contrast velocity volumes"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Generate an analytic phantom dataset");
    c_sim->add_option("--phantom", sim.phantom, "poiseuille|helix")->capture_default_str();
    c_sim->add_option("--dims", sim.dims, "HR grid m,n,s")->capture_default_str();
    c_sim->add_option("--frames", sim.frames, "Number of cardiac frames")->capture_default_str();
    c_sim->add_option("--venc", sim.venc, "VENC in cm/s")->capture_default_str();
    c_sim->add_option("--vmax", sim.vmax, "Peak centerline speed in cm/s")->capture_default_str();
    c_sim->add_option("--radius-fraction", sim.radius_fraction, "Tube radius / transverse size")->capture_default_str();
    c_sim->add_option("--magnitude-in", sim.magnitude_in)->capture_default_str();
    c_sim->add_option("--magnitude-out", sim.magnitude_out)->capture_default_str();
    c_sim->add_option("--out", sim.out, "Output volume file")->required();

    DegradeArgs deg;
    auto* c_deg = app.add_subcommand("degrade", "Simulate a low-resolution noisy acquisition");
    c_deg->add_option("--in", deg.in, "HR volume file")->required();
    c_deg->add_option("--out", deg.out, "LR volume file (calibration sidecar: <out>.cal)")->required();
    c_deg->add_option("--factor", deg.factor, "Decimation dr,dc,ds")->capture_default_str();
    c_deg->add_option("--noise-psnr", deg.noise_psnr, "Target PSNR in dB, or none")->capture_default_str();
    c_deg->add_option("--seed", deg.seed)->capture_default_str();
    c_deg->add_option("--kernel", deg.kernel, "ideal|gaussian")->capture_default_str();
    c_deg->add_option("--fwhm", deg.fwhm, "Gaussian FWHM in k-space bins")->capture_default_str();

    SrArgs sr;
    auto* c_sr = app.add_subcommand("sr", "Super-resolve a low-resolution dataset");
    c_sr->add_option("--in", sr.in, "LR volume file")->required();
    c_sr->add_option("--out", sr.out, "HR volume file")->required();
    c_sr->add_option("--method", sr.method, "fsr|trilinear|tricubic")->capture_default_str();
    c_sr->add_option("--factor", sr.factor, "Decimation dr,dc,ds")->capture_default_str();
    c_sr->add_option("--tau", sr.tau, "Regularization weight (> 0)")->capture_default_str();
    c_sr->add_option("--prior", sr.prior, "trilinear|zero-fill")->capture_default_str();
    c_sr->add_option("--kernel", sr.kernel, "ideal|gaussian")->capture_default_str();
    c_sr->add_option("--fwhm", sr.fwhm, "Gaussian FWHM in k-space bins")->capture_default_str();
    c_sr->add_option("--report", sr.report, "Solve report CSV (default <out>.solve.csv)");

    EvalArgs ev;
    auto* c_ev = app.add_subcommand("eval", "Compare a result and a baseline against ground truth");
    c_ev->add_option("--truth", ev.truth)->required();
    c_ev->add_option("--sr", ev.sr)->required();
    c_ev->add_option("--baseline", ev.baseline)->required();
    c_ev->add_option("--out", ev.out, "CSV report")->required();
    c_ev->add_option("--sr-name", ev.sr_name)->capture_default_str();
    c_ev->add_option("--baseline-name", ev.baseline_name)->capture_default_str();
    c_ev->add_option("--mask", ev.mask, "Mask volume (nonzero frame-0 magnitude)");
    c_ev->add_option("--mask-threshold", ev.mask_threshold)->capture_default_str();
    c_ev->add_flag("--per-voxel-mre", ev.per_voxel, "Normalize MRE by each voxel's reference speed");

    OracleArgs orc;
    auto* c_orc = app.add_subcommand("oracle-check", "Compare the fast solver with the dense solve");
    c_orc->add_option("--dims", orc.dims, "Single HR grid m,n,s (default: built-in matrix)");
    c_orc->add_option("--factor", orc.factor, "Decimation for --dims");
    c_orc->add_option("--tol", orc.tol)->capture_default_str();
    c_orc->add_flag("--break-constant", orc.break_constant, "Corrupt the fast solver (negative control)");

    PipelineArgs pipe;
    auto* c_pipe = app.add_subcommand("pipeline", "simulate -> degrade -> sr -> eval in one run");
    c_pipe->add_option("--config", pipe.config, "key=value config file");
    c_pipe->add_option("--out-dir", pipe.out_dir, "Output directory (overrides config)");
    c_pipe->add_option("--set", pipe.overrides, "Override a config key, key=value (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        std::cerr << (subs.empty() ? app.help() : subs.front()->help());
        return kExitUsage;
    }

    try {
        if (c_sim->parsed()) return run_simulate(sim);
        if (c_deg->parsed()) return run_degrade(deg);
        if (c_sr->parsed()) return run_sr(sr);
        if (c_ev->parsed()) return run_eval(ev);
        if (c_orc->parsed()) return run_oracle(orc);
        if (c_pipe->parsed()) return run_pipeline_cmd(pipe);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
