#include "rgtn/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "rgtn/metrics.hpp"
#include "rgtn/tensor_io.hpp"

namespace rgtn::cli {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

fs::path out_dir(const RunConfig& cfg) {
    const fs::path p(cfg.out);
    if (!fs::is_directory(p)) throw std::runtime_error("output directory '" + cfg.out + "' does not exist");
    return p;
}

std::string shape_string(const Shape& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
    return out + ")";
}

DenseTensor load_input(const RunConfig& cfg) {
    if (cfg.input.tensor.empty()) throw ConfigError("input.tensor is required");
    return load_tensor(cfg.input.tensor);
}

DenseTensor load_mask_or_full(const RunConfig& cfg, const DenseTensor& x) {
    if (cfg.input.mask.empty()) return DenseTensor::filled(x.shape(), 1.0);
    DenseTensor m = load_tensor(cfg.input.mask);
    if (m.shape() != x.shape()) throw ShapeError("mask shape does not match tensor shape");
    return m;
}

std::string dataset_label(const RunConfig& cfg) {
    if (!cfg.dataset.empty()) return cfg.dataset;
    return fs::path(cfg.input.tensor).stem().string();
}

double cr_percent(const TNGraph& g, const DenseTensor& x) {
    return 100.0 * static_cast<double>(param_count(g)) / static_cast<double>(x.size());
}

void write_search_outputs(const fs::path& dir, const SearchResult& res, const RGConfig& cfg) {
    save_structure(dir / "best.json", res.best);
    const double tau = temperature(res.report.total_steps, cfg);
    std::ofstream sig(dir / "signature.txt");
    sig << signature_to_string(harden(res.best, cfg.eps_diag, cfg.delta_gate, tau)) << '\n';
    std::ofstream rep(dir / "report.json");
    write_report(rep, res.report);
    if (!sig || !rep) throw std::runtime_error("failed writing search outputs in " + dir.string());
}

}  // namespace

int synth(const RunConfig& cfg, std::ostream& log) {
    const fs::path dir = out_dir(cfg);
    const TruthSpec spec = cfg.synth.truth_spec(cfg.seed);
    const TNGraph truth = gen_structure(spec);
    DenseTensor x = realize(truth);
    if (cfg.synth.noise_fraction > 0.0)
        x = add_noise(x, cfg.synth.noise_fraction * frobenius_norm(x), cfg.seed + 1);
    save_tensor(dir / "tensor.rgt", x);
    save_structure(dir / "truth.json", truth);
    log << "synth: shape " << shape_string(x.shape()) << " seed " << cfg.seed << " truth "
        << signature_to_string(harden(truth, cfg.search.eps_diag, cfg.search.delta_gate, kRealizeTemperature)) << '\n';
    if (cfg.synth.missing_fraction > 0.0) {
        const std::uint64_t mask_seed = cfg.seed + 2;
        save_tensor(dir / "mask.rgt", gen_mask(x.shape(), cfg.synth.missing_fraction, mask_seed));
        log << "synth: mask missing " << cfg.synth.missing_fraction << " seed " << mask_seed << '\n';
    }
    return kExitOk;
}

int search(const RunConfig& cfg, std::ostream& log) {
    const fs::path dir = out_dir(cfg);
    const DenseTensor x = load_input(cfg);
    const DenseTensor mask = load_mask_or_full(cfg, x);
    RGConfig sc = cfg.search;
    sc.seed = cfg.seed;
    const auto start = Clock::now();
    const BoundedSearch bs = rg_search_to_bound(x, mask, sc, cfg.eval.re_bound, cfg.eval.max_bond);
    const double secs = seconds_since(start);
    write_search_outputs(dir, bs.result, sc);
    ResultRow row{"rgtn", dataset_label(cfg), cfg.eval.re_bound, cr_percent(bs.result.best, x), bs.re, std::nullopt,
                  secs};
    append_result(dir / "results.csv", row);
    log << "search: init_bond " << bs.init_bond << " re " << bs.re << " cr " << row.cr << "% bound "
        << (bs.met ? "met" : "missed") << " in " << secs << " s\n";
    if (bs.result.report.aborted) {
        log << "search: aborted: " << bs.result.report.diagnostic << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}

int complete(const RunConfig& cfg, std::ostream& log) {
    const fs::path dir = out_dir(cfg);
    DenseTensor x = load_input(cfg);
    if (cfg.input.mask.empty()) throw ConfigError("complete: input.mask is required");
    const DenseTensor mask = load_mask_or_full(cfg, x);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] *= mask[i];
    RGConfig sc = cfg.search;
    sc.seed = cfg.seed;
    const auto start = Clock::now();
    const SearchResult res = rg_search(x, mask, sc);
    const double secs = seconds_since(start);
    const DenseTensor est = reconstruct(res.best, temperature(res.report.total_steps, sc));
    save_tensor(dir / "completed.rgt", est);
    write_search_outputs(dir, res, sc);

    ResultRow row{"rgtn", dataset_label(cfg), cfg.eval.re_bound, cr_percent(res.best, x), res.report.best_masked_re,
                  std::nullopt, secs};
    if (!cfg.input.truth.empty()) {
        const DenseTensor truth = load_tensor(cfg.input.truth);
        if (truth.shape() != x.shape()) throw ShapeError("truth shape does not match tensor shape");
        row.re = relative_error(truth, est);
        if (cfg.eval.temporal_mode) {
            const auto [t, e] = rescale_to_peak(truth, est, cfg.eval.peak);
            row.mpsnr = mpsnr(t, e, *cfg.eval.temporal_mode, cfg.eval.peak).mean_db;
        }
    }
    append_result(dir / "results.csv", row);
    log << "complete: re " << row.re;
    if (row.mpsnr) log << " mpsnr " << *row.mpsnr << " dB";
    log << " in " << secs << " s\n";
    if (res.report.aborted) {
        log << "complete: aborted: " << res.report.diagnostic << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}

int reveal(const RunConfig& cfg, std::ostream& log) {
    const fs::path dir = out_dir(cfg);
    std::vector<std::pair<std::string, TruthSpec>> specs;
    for (const auto& name : cfg.reveal.specs) specs.push_back({name, preset(name, cfg.seed)});
    RevealOptions opt;
    opt.trials = cfg.reveal.trials;
    opt.rank_tol = cfg.reveal.rank_tol;
    opt.workers = cfg.workers;
    opt.noise_fraction = cfg.reveal.noise_fraction;
    opt.master_seed = cfg.seed;
    const auto results = success_rate(specs, opt, cfg.search, [&](const std::string& spec, const TrialOutcome& o) {
        log << "reveal: " << spec << " trial " << o.trial << (o.matched ? " matched" : " missed") << " re "
            << o.re_final << '\n';
    });
    std::ofstream table(dir / "success.csv"), trials(dir / "trials.csv");
    write_success_table(table, results);
    write_trial_log(trials, results);
    if (!table || !trials) throw std::runtime_error("failed writing reveal outputs in " + dir.string());
    for (const auto& r : results) log << "reveal: " << r.name << ' ' << r.matches << '/' << r.trials << '\n';
    return kExitOk;
}

int compare(const RunConfig& cfg, std::ostream& log) {
    const fs::path dir = out_dir(cfg);
    const DenseTensor x = load_input(cfg);
    const DenseTensor mask = load_mask_or_full(cfg, x);
    const std::optional<DenseTensor> opt_mask =
        cfg.input.mask.empty() ? std::nullopt : std::optional<DenseTensor>(mask);
    int code = kExitOk;
    for (double bound : cfg.compare.re_bounds) {
        for (const auto& method : cfg.compare.methods) {
            ResultRow row{method, dataset_label(cfg), bound, 0.0, 0.0, std::nullopt, 0.0};
            const auto start = Clock::now();
            if (method == "rgtn") {
                RGConfig sc = cfg.search;
                sc.seed = cfg.seed;
                const auto bs = rg_search_to_bound(x, mask, sc, bound, cfg.eval.max_bond);
                row.cr = cr_percent(bs.result.best, x);
                row.re = bs.re;
                if (bs.result.report.aborted) code = kExitNumerical;
            } else if (method == "trals") {
                RingSpec base;
                base.max_iters = cfg.trals.max_iters;
                base.tol = cfg.trals.tol;
                base.ridge = cfg.trals.ridge;
                base.init = cfg.trals.init;
                TrAlsResult fit;
                if (cfg.trals.ranks.empty()) {
                    fit = tr_als_rank_schedule(x, opt_mask, bound, cfg.trals.max_rank, base, cfg.seed).fit;
                } else {
                    base.ranks = cfg.trals.ranks;
                    fit = tr_als(x, opt_mask, base, cfg.seed);
                }
                row.cr = fit.eval.cr_percent;
                row.re = fit.eval.re;
                if (fit.aborted) code = kExitNumerical;
            } else {
                throw ConfigError("unknown compare method '" + method + "'");
            }
            row.seconds = seconds_since(start);
            append_result(dir / "results.csv", row);
            log << "compare: " << format_row(row) << '\n';
        }
    }
    return code;
}

std::vector<std::string> command_names() { return {"synth", "search", "complete", "reveal", "compare"}; }

int run(const std::string& command, const RunConfig& cfg, std::ostream& log, std::ostream& err) {
    try {
        cfg.validate();
        if (command == "synth") return synth(cfg, log);
        if (command == "search") return search(cfg, log);
        if (command == "complete") return complete(cfg, log);
        if (command == "reveal") return reveal(cfg, log);
        if (command == "compare") return compare(cfg, log);
        err << "error: unknown command '" << command << "'\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

}  // namespace rgtn::cli
