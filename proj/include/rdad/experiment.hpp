#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rdad/anomaly_sampling.hpp"
#include "rdad/compressors.hpp"
#include "rdad/detectors_eval.hpp"
#include "rdad/distinguishability.hpp"
#include "rdad/errors.hpp"
#include "rdad/gaussian_core.hpp"
#include "rdad/random.hpp"
#include "rdad/rate_distortion.hpp"

namespace rdad {

inline constexpr std::string_view kVersion = "0.1.0";

enum class Compressor { rdc, pcc };

inline std::string_view to_string(Compressor c) { return c == Compressor::rdc ? "rdc" : "pcc"; }

inline Compressor parse_compressor(std::string_view name) {
    if (name == "rdc") return Compressor::rdc;
    if (name == "pcc") return Compressor::pcc;
    throw DomainError("unknown compressor '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Text helpers

namespace csv {

/// 12 significant digits, '.' decimal separator; "inf"/"nan" for non-finite values.
inline std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string num(std::optional<double> v) { return v ? num(*v) : std::string{}; }

inline void metadata(std::ostream& os, std::uint64_t seed) {
    os << "# seed=" << seed << " version=" << kVersion << '\n';
}

}  // namespace csv

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

inline double parse_double(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw DomainError("not a number: '" + s + "'");
    }
    if (used != s.size()) throw DomainError("not a number: '" + s + "'");
    return v;
}

inline long long parse_integer(const std::string& s) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &used);
    } catch (const std::exception&) {
        throw DomainError("not an integer: '" + s + "'");
    }
    if (used != s.size()) throw DomainError("not an integer: '" + s + "'");
    return v;
}

/// "a,b,c" or an inclusive range "start:step:stop".
inline std::vector<double> parse_real_list(std::string_view text) {
    const std::string t = trim(text);
    detail::require(!t.empty(), "empty list");
    if (t.find(':') != std::string::npos) {
        const auto parts = split(t, ':');
        detail::require(parts.size() == 3, "range must be start:step:stop");
        const double start = parse_double(parts[0]);
        const double step = parse_double(parts[1]);
        const double stop = parse_double(parts[2]);
        detail::require(step > 0.0 && stop >= start, "invalid range");
        const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
        std::vector<double> out;
        for (long long i = 0; i <= count; ++i) {
            // Rounded to 12 digits so 0.04 * 16 prints as 0.64.
            out.push_back(parse_double(csv::num(start + static_cast<double>(i) * step)));
        }
        return out;
    }
    std::vector<double> out;
    for (const auto& p : split(t, ',')) out.push_back(parse_double(p));
    return out;
}

inline std::vector<Index> parse_index_list(std::string_view text) {
    std::vector<Index> out;
    for (const auto& p : split(trim(text), ',')) out.push_back(static_cast<Index>(parse_integer(p)));
    return out;
}

/// Flat `key = value` lines; '#' and ';' start comments, [section] headers are ignored.
inline std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in) {
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find_first_of("#;");
        const std::string body = trim(std::string_view(line).substr(0, hash));
        if (body.empty() || body.front() == '[') continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw DomainError("config line " + std::to_string(line_no) + " is not key = value");
        }
        std::string key = trim(std::string_view(body).substr(0, eq));
        std::string value = trim(std::string_view(body).substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        while (!key.empty() && key.front() == '-') key.erase(key.begin());
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Configuration

inline std::vector<double> default_distortion_grid() { return parse_real_list("0:0.04:0.64"); }

struct ExperimentConfig {
    Index n = 32;
    std::vector<double> localizations{0.0, 0.05, 0.2};
    std::vector<double> distortion_grid = default_distortion_grid();
    std::vector<Compressor> compressors{Compressor::rdc, Compressor::pcc};
    std::vector<Detector> detectors{Detector::ld, Detector::npd};
    Index n_anomalies = 100;
    Index n_ok = 1000;
    Index n_ko = 1000;
    std::uint64_t master_seed = 1;
    std::string output_path;  ///< empty writes to stdout
    unsigned threads = 1;

    // Used by the rd-curve and concentration subcommands.
    Index mi_samples = 20000;
    std::vector<Index> dims{8, 16, 32, 64, 128};
    Index population = 200;

    void validate() const {
        detail::require(n >= 1, "n must be positive");
        detail::require(!localizations.empty(), "need at least one localization");
        for (double l : localizations) {
            detail::require(l >= 0.0 && l < 1.0 - 1.0 / static_cast<double>(n), "localization out of range");
        }
        detail::require(!distortion_grid.empty(), "need at least one grid point");
        for (double d : distortion_grid) detail::require(d >= 0.0 && d <= 1.0, "normalized distortion must lie in [0, 1]");
        detail::require(!compressors.empty(), "need at least one compressor");
        detail::require(!detectors.empty(), "need at least one detector");
        detail::require(n_anomalies >= 0, "anomaly count must be non-negative");
        detail::require(n_ok >= 2 && n_ko >= 2, "instance counts must be at least 2");
        detail::require(threads >= 1, "need at least one worker thread");
    }
};

/// Applies one `key = value` setting; keys match the CLI flag names.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "n") {
        cfg.n = static_cast<Index>(parse_integer(value));
    } else if (key == "seed") {
        cfg.master_seed = static_cast<std::uint64_t>(std::stoull(value));
    } else if (key == "grid") {
        cfg.distortion_grid = parse_real_list(value);
    } else if (key == "loc") {
        cfg.localizations = parse_real_list(value);
    } else if (key == "compressor") {
        cfg.compressors.clear();
        for (const auto& c : split(value, ',')) cfg.compressors.push_back(parse_compressor(c));
    } else if (key == "detector") {
        cfg.detectors.clear();
        for (const auto& d : split(value, ',')) cfg.detectors.push_back(parse_detector(d));
    } else if (key == "out") {
        cfg.output_path = value;
    } else if (key == "anomalies") {
        cfg.n_anomalies = static_cast<Index>(parse_integer(value));
    } else if (key == "ok") {
        cfg.n_ok = static_cast<Index>(parse_integer(value));
    } else if (key == "ko") {
        cfg.n_ko = static_cast<Index>(parse_integer(value));
    } else if (key == "threads") {
        cfg.threads = static_cast<unsigned>(parse_integer(value));
    } else if (key == "samples") {
        cfg.mi_samples = static_cast<Index>(parse_integer(value));
    } else if (key == "dims") {
        cfg.dims = parse_index_list(value);
    } else if (key == "population") {
        cfg.population = static_cast<Index>(parse_integer(value));
    } else {
        throw DomainError("unknown setting '" + key + "'");
    }
}

// ---------------------------------------------------------------------------
// Operating points

/// Normal source with the requested localization: AR(1) covariance in eigen form.
inline CovarianceSpec source_for_localization(double loc, Index n) {
    return ar1_covariance(solve_omega_for_localization(loc, n, 1e-12), n);
}

/**
 * A compressor tuned to the normal source at normalized distortion d = D/n.
 * RDC hits d exactly (d = 0 is the undistorted channel). PCC uses the largest
 * achievable step at or below d and sets `pcc_step` when it falls short.
 */
struct OperatingPoint {
    Compressor compressor = Compressor::rdc;
    double d_requested = 0.0;
    double d_achieved = 0.0;
    bool pcc_step = false;
    WaterFillSolution rdc;
    PccPlan pcc;

    Index surviving() const { return compressor == Compressor::rdc ? rdc.n_theta : pcc.kept; }
};

inline OperatingPoint make_operating_point(Compressor compressor, const CovarianceSpec& source, double d) {
    const double n = static_cast<double>(source.dim());
    const double total = source.trace();
    detail::require(d >= 0.0 && d <= 1.0, "normalized distortion must lie in [0, 1]");
    OperatingPoint op;
    op.compressor = compressor;
    op.d_requested = d;
    const double delta = std::min(d * n, total);
    if (compressor == Compressor::rdc) {
        op.rdc = delta > 0.0 ? reverse_waterfill(source.eigenvalues(), delta)
                             : water_level_solution(source.eigenvalues(), 0.0);
        op.d_achieved = op.rdc.distortion / n;
    } else {
        op.pcc = pcc_plan(source, delta);
        op.d_achieved = op.pcc.achieved_distortion / n;
        op.pcc_step = op.d_achieved < d - 1e-12;
    }
    return op;
}

/// Surviving normal/anomalous blocks at an operating point; empty when nothing survives.
inline DistortedPair distorted_pair(const OperatingPoint& op, const CovarianceSpec& source,
                                    const MatrixXd& anomaly_world) {
    if (op.surviving() == 0) {
        return {};
    }
    if (op.compressor == Compressor::rdc) {
        return rdc_distorted_pair(source, anomaly_world, op.rdc.theta);
    }
    return pcc_distorted_pair(source, anomaly_world, op.pcc);
}

// ---------------------------------------------------------------------------
// Monte Carlo sweep

inline constexpr long kWhiteAnomaly = -1;

struct ExperimentRecord {
    Compressor compressor = Compressor::rdc;
    double localization = 0.0;
    double d_requested = 0.0;
    double d_achieved = 0.0;
    long anomaly_id = kWhiteAnomaly;
    Detector detector = Detector::ld;
    double zeta = 0.0;
    double kappa = 0.0;
    double auc = 0.5;
    double psi = 0.5;
    std::uint64_t seed = 0;  ///< anomaly seed (reproduces the sampled covariance)
    bool pcc_step = false;
    bool degenerate = false;
};

/// Seed of anomaly `id` (kWhiteAnomaly for the white reference).
inline std::uint64_t anomaly_seed(std::uint64_t master, long id) {
    return id == kWhiteAnomaly ? derive_seed(master, {0}) : derive_seed(master, {1, static_cast<std::uint64_t>(id)});
}

/// Anomalous covariance (world coordinates) reproduced from its seed.
inline MatrixXd anomaly_covariance(std::uint64_t seed, Index n, bool white) {
    if (white) return MatrixXd::Identity(n, n);
    Rng rng(seed);
    return sample_anomaly(n, rng).covariance();
}

/// Seed of one detector evaluation, derived from the anomaly seed and the sweep indices.
inline std::uint64_t evaluation_seed(std::uint64_t anomaly, std::size_t loc_index, std::size_t grid_index,
                                     Compressor c, Detector d) {
    return derive_seed(anomaly, {static_cast<std::uint64_t>(loc_index), static_cast<std::uint64_t>(grid_index),
                                 static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(d)});
}

namespace detail {

/// Runs body(i) for i in [0, count) on `threads` workers; the first exception is rethrown.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                body(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace detail

/**
 * Full sweep over localization x compressor x grid x anomaly x detector.
 *
 * Every (localization, compressor, grid) cell first gets the white-anomaly reference
 * (anomaly_id = kWhiteAnomaly), then the sampled anomalies 0..n_anomalies-1. Tasks are
 * seeded from the master seed and their indices only, and results are stored by task
 * index, so the output is identical for any thread count.
 */
inline std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const Index n = cfg.n;
    const std::size_t n_loc = cfg.localizations.size();
    const std::size_t n_comp = cfg.compressors.size();
    const std::size_t n_grid = cfg.distortion_grid.size();
    const std::size_t n_anom = static_cast<std::size_t>(cfg.n_anomalies) + 1;
    const std::size_t n_det = cfg.detectors.size();

    std::vector<CovarianceSpec> sources;
    for (double loc : cfg.localizations) sources.push_back(source_for_localization(loc, n));

    std::vector<OperatingPoint> ops(n_loc * n_comp * n_grid);
    for (std::size_t li = 0; li < n_loc; ++li)
        for (std::size_t ci = 0; ci < n_comp; ++ci)
            for (std::size_t gi = 0; gi < n_grid; ++gi)
                ops[(li * n_comp + ci) * n_grid + gi] =
                    make_operating_point(cfg.compressors[ci], sources[li], cfg.distortion_grid[gi]);

    std::vector<MatrixXd> anomalies(n_anom);
    std::vector<std::uint64_t> seeds(n_anom);
    detail::parallel_for(n_anom, cfg.threads, [&](std::size_t ai) {
        const long id = static_cast<long>(ai) - 1;
        seeds[ai] = anomaly_seed(cfg.master_seed, id);
        anomalies[ai] = anomaly_covariance(seeds[ai], n, id == kWhiteAnomaly);
    });

    const std::size_t n_tasks = ops.size() * n_anom;
    std::vector<ExperimentRecord> records(n_tasks * n_det);
    detail::parallel_for(n_tasks, cfg.threads, [&](std::size_t task) {
        const std::size_t ai = task % n_anom;
        const std::size_t cell = task / n_anom;
        const std::size_t gi = cell % n_grid;
        const std::size_t ci = (cell / n_grid) % n_comp;
        const std::size_t li = cell / (n_grid * n_comp);
        const OperatingPoint& op = ops[cell];
        const DistortedPair pair = distorted_pair(op, sources[li], anomalies[ai]);
        const double z = zeta(pair);
        const double k = kappa(pair);
        for (std::size_t di = 0; di < n_det; ++di) {
            Rng rng(evaluation_seed(seeds[ai], li, gi, op.compressor, cfg.detectors[di]));
            const DetectionResult res = evaluate(cfg.detectors[di], pair, cfg.n_ok, cfg.n_ko, rng);
            ExperimentRecord& rec = records[task * n_det + di];
            rec.compressor = op.compressor;
            rec.localization = cfg.localizations[li];
            rec.d_requested = op.d_requested;
            rec.d_achieved = op.d_achieved;
            rec.anomaly_id = static_cast<long>(ai) - 1;
            rec.detector = cfg.detectors[di];
            rec.zeta = z;
            rec.kappa = k;
            rec.auc = res.auc;
            rec.psi = res.psi;
            rec.seed = seeds[ai];
            rec.pcc_step = op.pcc_step;
            rec.degenerate = res.degenerate;
        }
    });
    return records;
}

inline void write_records_csv(std::ostream& os, const std::vector<ExperimentRecord>& records, std::uint64_t seed) {
    csv::metadata(os, seed);
    os << "compressor,localization,d_requested,d_achieved,anomaly_id,detector,zeta,kappa,auc,psi,seed,flags\n";
    for (const auto& r : records) {
        std::string flags;
        if (r.pcc_step) flags = "pcc_step";
        if (r.degenerate) flags += flags.empty() ? "degenerate" : ";degenerate";
        os << to_string(r.compressor) << ',' << csv::num(r.localization) << ',' << csv::num(r.d_requested) << ','
           << csv::num(r.d_achieved) << ','
           << (r.anomaly_id == kWhiteAnomaly ? std::string("white") : std::to_string(r.anomaly_id)) << ','
           << to_string(r.detector) << ',' << csv::num(r.zeta) << ',' << csv::num(r.kappa) << ','
           << csv::num(r.auc) << ',' << csv::num(r.psi) << ',' << r.seed << ',' << flags << '\n';
    }
}

// ---------------------------------------------------------------------------
// Theory curves

struct LabeledSpectrum {
    double localization;
    VectorXd eigenvalues;  ///< descending, trace n
};

/// White-anomaly zeta/kappa along the grid, plus one row per spectrum for the smallest
/// zero of zeta ("root", or "root-none" when the spectrum is white).
inline void emit_theory_curves(std::ostream& os, const std::vector<LabeledSpectrum>& spectra,
                               const std::vector<double>& d_grid, std::uint64_t seed = 0) {
    csv::metadata(os, seed);
    os << "kind,localization,d,zeta_white,kappa_white,theta,n_theta\n";
    for (const auto& spec : spectra) {
        const VectorXd& lambda = spec.eigenvalues;
        const double n = static_cast<double>(lambda.size());
        for (double d : d_grid) {
            detail::require(d >= 0.0 && d <= 1.0, "normalized distortion must lie in [0, 1]");
            const double delta = std::min(d * n, lambda.sum());
            const WaterFillSolution sol =
                delta > 0.0 ? reverse_waterfill(lambda, delta) : water_level_solution(lambda, 0.0);
            os << "curve," << csv::num(spec.localization) << ',' << csv::num(d) << ','
               << csv::num(zeta_white(lambda, sol.theta)) << ',' << csv::num(kappa_white(lambda, sol.theta)) << ','
               << csv::num(sol.theta) << ',' << sol.n_theta << '\n';
        }
        const ZetaZero root = find_zeta_zero(lambda, 1e-12);
        if (!root.theta_star) {
            os << "root-none," << csv::num(spec.localization) << ",,,,,\n";
            continue;
        }
        const WaterFillSolution sol = water_level_solution(lambda, *root.theta_star);
        os << "root," << csv::num(spec.localization) << ',' << csv::num(sol.distortion / n) << ','
           << csv::num(zeta_white(lambda, sol.theta)) << ',' << csv::num(kappa_white(lambda, sol.theta)) << ','
           << csv::num(sol.theta) << ',' << sol.n_theta << '\n';
    }
}

inline void emit_theory_curves(std::ostream& os, Index n, const std::vector<double>& localizations,
                               const std::vector<double>& d_grid, std::uint64_t seed = 0) {
    std::vector<LabeledSpectrum> spectra;
    for (double loc : localizations) spectra.push_back({loc, source_for_localization(loc, n).eigenvalues()});
    emit_theory_curves(os, spectra, d_grid, seed);
}

// ---------------------------------------------------------------------------
// Rate-distortion curves

struct RdCurvePoint {
    Compressor compressor = Compressor::rdc;
    double localization = 0.0;
    double d_requested = 0.0;
    double d_achieved = 0.0;
    std::optional<double> rate_analytic;  ///< RDC only; empty for PCC or unbounded RDC
    bool rate_unbounded = false;
    double rate_mi_quantized = 0.0;
    Index saturated = 0;
};

/**
 * Rate of a compressor at distortion d measured as the jointly-Gaussian mutual
 * information between the source and its 16-bit quantized reconstruction.
 * Source draws depend on `source_seed` only, so compressors evaluated with the same
 * seed see the same instances.
 */
inline RdCurvePoint rd_curve_point(Compressor compressor, const CovarianceSpec& source, double localization,
                                   double d, Index samples, std::uint64_t source_seed, std::uint64_t channel_seed,
                                   int bits = 16) {
    const OperatingPoint op = make_operating_point(compressor, source, d);
    const CovarianceSpec eig_source = CovarianceSpec::from_diagonal(source.eigenvalues());
    Rng source_rng(source_seed);
    const GaussianSampleBatch x = sample_gaussian(eig_source, samples, source_rng);

    const VectorXd& lambda = source.eigenvalues();
    VectorXd sd(lambda.size());
    MatrixXd x_hat;
    if (compressor == Compressor::rdc) {
        Rng channel_rng(channel_seed);
        x_hat = encode_rdc_batch(x.data(), TestChannel{eig_source, op.rdc}, channel_rng);
        for (Index j = 0; j < sd.size(); ++j) sd(j) = std::sqrt(std::max(0.0, lambda(j) - op.rdc.theta));
    } else {
        x_hat = encode_pcc_batch(x.data(), op.pcc);
        for (Index j = 0; j < sd.size(); ++j) sd(j) = j < op.pcc.kept ? std::sqrt(lambda(j)) : 0.0;
    }
    RdCurvePoint pt;
    const QuantizerSpec quantizer = make_quantizer(sd, bits);
    const MatrixXd deq = quantize_batch(x_hat, quantizer, &pt.saturated);
    pt.compressor = compressor;
    pt.localization = localization;
    pt.d_requested = d;
    pt.d_achieved = op.d_achieved;
    if (compressor == Compressor::rdc) {
        pt.rate_analytic = op.rdc.rate_bits;
        pt.rate_unbounded = op.rdc.rate_unbounded();
    }
    pt.rate_mi_quantized = gaussian_mi_estimate(x, GaussianSampleBatch(deq));
    return pt;
}

/// Rate-distortion rows for every (compressor, localization, grid point). Per-vector
/// rates are in bits; the per-sample columns divide by n.
inline std::vector<RdCurvePoint> rd_curves(const ExperimentConfig& cfg) {
    std::vector<RdCurvePoint> out;
    for (std::size_t ci = 0; ci < cfg.compressors.size(); ++ci) {
        for (std::size_t li = 0; li < cfg.localizations.size(); ++li) {
            const CovarianceSpec source = source_for_localization(cfg.localizations[li], cfg.n);
            for (std::size_t gi = 0; gi < cfg.distortion_grid.size(); ++gi) {
                out.push_back(rd_curve_point(cfg.compressors[ci], source, cfg.localizations[li],
                                             cfg.distortion_grid[gi], cfg.mi_samples,
                                             derive_seed(cfg.master_seed, {2, li, gi}),
                                             derive_seed(cfg.master_seed, {3, li, gi, ci})));
            }
        }
    }
    return out;
}

inline void write_rd_curves_csv(std::ostream& os, const std::vector<RdCurvePoint>& rows, Index n,
                                std::uint64_t seed) {
    csv::metadata(os, seed);
    os << "compressor,localization,d_requested,d_achieved,rate_analytic,rate_mi_quantized,"
          "rate_analytic_per_sample,rate_mi_quantized_per_sample,saturated\n";
    const double dn = static_cast<double>(n);
    for (const auto& r : rows) {
        std::string analytic;
        std::string analytic_per_sample;
        if (r.rate_unbounded) {
            analytic = analytic_per_sample = "inf";
        } else if (r.rate_analytic) {
            analytic = csv::num(*r.rate_analytic);
            analytic_per_sample = csv::num(*r.rate_analytic / dn);
        }
        os << to_string(r.compressor) << ',' << csv::num(r.localization) << ',' << csv::num(r.d_requested) << ','
           << csv::num(r.d_achieved) << ',' << analytic << ',' << csv::num(r.rate_mi_quantized) << ','
           << analytic_per_sample << ',' << csv::num(r.rate_mi_quantized / dn) << ',' << r.saturated << '\n';
    }
}

// ---------------------------------------------------------------------------
// Concentration

inline void emit_concentration(std::ostream& os, const std::vector<Index>& dims, Index population,
                               std::uint64_t seed, double percentile = 0.98) {
    Rng rng(seed);
    const ConcentrationStats stats = concentration_stats(dims, population, percentile, rng);
    csv::metadata(os, seed);
    os << "n,delta2_mean,delta2_lo,delta2_hi,deltainf_mean,deltainf_lo,deltainf_hi\n";
    for (std::size_t i = 0; i < stats.dims.size(); ++i) {
        os << stats.dims[i] << ',' << csv::num(stats.delta2_mean[i]) << ',' << csv::num(stats.delta2_lo[i]) << ','
           << csv::num(stats.delta2_hi[i]) << ',' << csv::num(stats.deltainf_mean[i]) << ','
           << csv::num(stats.deltainf_lo[i]) << ',' << csv::num(stats.deltainf_hi[i]) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Scores from file

/// Reads `label,score` lines (label ok/ko or 0/1); a non-numeric first line is a header.
inline ScoreSets read_labeled_scores(std::istream& in) {
    ScoreSets sets;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto parts = split(t, ',');
        if (parts.size() != 2) throw DomainError("line " + std::to_string(line_no) + ": expected label,score");
        const std::string& label = parts[0];
        double score = 0.0;
        try {
            score = parse_double(parts[1]);
        } catch (const DomainError&) {
            if (sets.ok.empty() && sets.ko.empty()) continue;  // header
            throw;
        }
        if (label == "ok" || label == "0") {
            sets.ok.push_back(score);
        } else if (label == "ko" || label == "1") {
            sets.ko.push_back(score);
        } else {
            throw DomainError("line " + std::to_string(line_no) + ": unknown label '" + label + "'");
        }
    }
    return sets;
}

}  // namespace rdad
