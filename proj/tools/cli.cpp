#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <list>
#include <numbers>
#include <optional>
#include <regex>
#include <sstream>
#include <variant>

#include "hmc/barrier.hpp"
#include "hmc/chaos.hpp"
#include "hmc/errors.hpp"
#include "hmc/number_models.hpp"
#include "hmc/parallel.hpp"
#include "hmc/partitions.hpp"
#include "hmc/series.hpp"
#include "hmc/stats.hpp"

#ifndef HMC_VERSION
#define HMC_VERSION "0.0.0"
#endif

namespace hmc::cli {

using json = nlohmann::ordered_json;

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

using Cell = std::variant<std::int64_t, std::uint64_t, double, std::string, bool>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct Result {
    Table table;
    std::vector<Check> checks;
    json extras = json::object();
    std::vector<std::pair<double, double>> plot;
};

struct Common {
    std::uint64_t seed = 1;
    std::size_t samples = 0;
    unsigned workers = 0;
    std::string out;
    std::string format = "csv";
    bool check = false;
};

struct Command {
    CLI::App* app = nullptr;
    Common common;
    std::function<Result(const Common&)> run;
};

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string to_text(const Cell& c) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>)
                return format_double(v);
            else if constexpr (std::is_same_v<T, bool>)
                return v ? "true" : "false";
            else if constexpr (std::is_same_v<T, std::string>)
                return v;
            else
                return std::to_string(v);
        },
        c);
}

json to_json(const Cell& c) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
                if (!std::isfinite(v)) return format_double(v);
                return v;
            } else {
                return v;
            }
        },
        c);
}

void write_csv(const Table& t, std::ostream& os) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << to_text(row[i]);
        os << '\n';
    }
}

json table_json(const Table& t) {
    json rows = json::array();
    for (const auto& row : t.rows) {
        json obj = json::object();
        for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = to_json(row[i]);
        rows.push_back(std::move(obj));
    }
    return json{{"columns", t.columns}, {"rows", rows}};
}

std::int64_t as_int(std::size_t v) { return static_cast<std::int64_t>(v); }

Check band_check(const std::string& name, double lo, double hi, double limit) {
    const double ratio = lo > 0.0 ? hi / lo : INFINITY;
    return {name, ratio <= limit, "max/min = " + format_double(ratio) + " (limit " + format_double(limit) + ")"};
}

ExpEngine parse_engine(const std::string& name) {
    if (name == "recurrence") return ExpEngine::Recurrence;
    if (name == "dc") return ExpEngine::DivideConquer;
    return ExpEngine::Automatic;
}

// Sample counts on the default decay grid; they fall with N to bound runtime.
std::size_t default_decay_samples(std::size_t N) {
    if (N <= 256) return 40000;
    if (N <= 1024) return 20000;
    if (N <= 4096) return 12000;
    return 10000;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

void add_sample(CLI::App& app, std::list<Command>& cmds) {
    auto& c = cmds.emplace_back();
    c.app = app.add_subcommand("sample", "Coefficients A(0..N) for one seeded draw");
    auto N = std::make_shared<std::size_t>(16);
    auto K = std::make_shared<double>(0.0);
    auto replicate = std::make_shared<std::uint64_t>(0);
    auto engine = std::make_shared<std::string>("auto");
    c.app->add_option("--N", *N, "Top degree")->capture_default_str();
    c.app->add_option("--K", *K, "Truncation parameter (0: K = N)")->capture_default_str();
    c.app->add_option("--replicate", *replicate, "Replicate index of the stream")->capture_default_str();
    c.app->add_option("--engine", *engine, "Exp engine")
        ->check(CLI::IsMember({"auto", "recurrence", "dc"}))
        ->capture_default_str();
    c.run = [=](const Common& common) {
        Result res;
        const Seed seed{common.seed, *replicate};
        GaussianStream stream(seed);
        const double k = *K > 0.0 ? *K : static_cast<double>(std::max<std::size_t>(*N, 1));
        const auto s = sample_A(*N, k, stream, parse_engine(*engine));
        res.table.columns = {"n", "re", "im", "abs", "seed", "replicate"};
        for (std::size_t n = 0; n <= *N; ++n) {
            const cplx a = s.coeffs[n];
            res.table.rows.push_back({as_int(n), a.real(), a.imag(), std::abs(a), Cell{common.seed},
                                      Cell{*replicate}});
            res.plot.emplace_back(static_cast<double>(n), std::abs(a));
        }
        return res;
    };
}

void add_moment(CLI::App& app, std::list<Command>& cmds) {
    auto& c = cmds.emplace_back();
    c.common.samples = 20000;
    c.app = app.add_subcommand("moment", "Monte Carlo E|A(N)|^{2q}");
    auto Ns = std::make_shared<std::vector<std::size_t>>(std::vector<std::size_t>{64});
    auto qs = std::make_shared<std::vector<double>>(std::vector<double>{1.0});
    auto band = std::make_shared<double>(3.0);
    c.app->add_option("--N", *Ns, "Degrees")->delimiter(',')->capture_default_str();
    c.app->add_option("--q", *qs, "Exponents in [0, 1]")->delimiter(',')->capture_default_str();
    c.app->add_option("--band", *band, "Max/min limit on the shape-compensated column per N")->capture_default_str();
    c.run = [=](const Common& common) {
        Result res;
        res.table.columns = {"N", "q", "samples", "mean", "std_error", "compensated", "seed"};
        json cq = json::object();
        for (std::size_t N : *Ns) {
            double lo = INFINITY, hi = 0.0;
            for (double q : *qs) {
                const auto est = estimate_moment(N, q, common.samples, Seed{common.seed, 0}, common.workers);
                const double comp = est.mean * moment_shape(std::max<std::size_t>(N, 1), q);
                res.table.rows.push_back({as_int(N), q, as_int(est.samples), est.mean, est.std_error, comp,
                                          Cell{common.seed}});
                cq[format_double(q)] = std::tgamma(1.0 + q);
                lo = std::min(lo, comp);
                hi = std::max(hi, comp);
                const std::string tag = "N=" + std::to_string(N) + " q=" + format_double(q);
                if (q == 1.0) {
                    const bool ok = std::abs(est.mean - 1.0) <= 4.0 * est.std_error;
                    res.checks.push_back({"second_moment " + tag, ok,
                                          "mean " + format_double(est.mean) + " se " + format_double(est.std_error)});
                } else if (q == 0.0) {
                    res.checks.push_back({"zeroth_moment " + tag, est.mean == 1.0 && est.std_error == 0.0, ""});
                }
            }
            if (qs->size() > 1) res.checks.push_back(band_check("shape_band N=" + std::to_string(N), lo, hi, *band));
        }
        // C_q = E|Z|^{2q} for a standard complex Gaussian Z
        res.extras["C_q"] = cq;
        return res;
    };
}

void add_decay(CLI::App& app, std::list<Command>& cmds) {
    auto& c = cmds.emplace_back();
    c.app = app.add_subcommand("decay", "First-moment decay table E|A(N)| and (log N)^{1/4} compensation");
    auto Ns = std::make_shared<std::vector<std::size_t>>();
    for (int e = 4; e <= 13; ++e) Ns->push_back(std::size_t{1} << e);
    auto per_N = std::make_shared<std::vector<std::size_t>>();
    auto band_min = std::make_shared<std::size_t>(64);
    auto band = std::make_shared<double>(3.0);
    c.app->add_option("--N", *Ns, "Increasing grid of N >= 2")->delimiter(',')->capture_default_str();
    c.app->add_option("--samples-per-N", *per_N, "Sample count per grid point")->delimiter(',');
    c.app->add_option("--band-min-N", *band_min, "Smallest N in the band check")->capture_default_str();
    c.app->add_option("--band", *band, "Max/min limit on the compensated column")->capture_default_str();
    c.run = [=](const Common& common) {
        std::vector<std::size_t> counts;
        if (!per_N->empty()) {
            require(per_N->size() == Ns->size(), "decay: --samples-per-N needs one entry per N");
            counts = *per_N;
        } else {
            for (std::size_t N : *Ns) counts.push_back(common.samples ? common.samples : default_decay_samples(N));
        }
        const auto table = fit_decay_band(*Ns, counts, Seed{common.seed, 0}, common.workers, *band_min);
        Result res;
        res.table.columns = {"N", "q", "samples", "mean", "std_error", "compensated", "seed"};
        bool bounded = true, monotone = true;
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            const auto& row = table.rows[i];
            res.table.rows.push_back({as_int(row.N), 0.5, as_int(row.estimate.samples), row.estimate.mean,
                                      row.estimate.std_error, row.compensated, Cell{common.seed}});
            res.plot.emplace_back(static_cast<double>(row.N), row.compensated);
            bounded = bounded && row.estimate.mean <= 1.0 + 4.0 * row.estimate.std_error;
            if (i > 0) {
                const auto& prev = table.rows[i - 1].estimate;
                const double combined = std::hypot(prev.std_error, row.estimate.std_error);
                monotone = monotone && row.estimate.mean <= prev.mean + 2.0 * combined;
            }
        }
        res.checks.push_back({"cauchy_schwarz", bounded, "every estimate <= 1 + 4 se"});
        res.checks.push_back({"monotone", monotone, "nonincreasing within 2 combined se"});
        res.checks.push_back({"band", table.band_ratio <= *band,
                              "max/min = " + format_double(table.band_ratio) + " over N >= " +
                                  std::to_string(*band_min)});
        res.extras["band_ratio"] = table.band_ratio;
        res.extras["band_min_N"] = *band_min;
        res.extras["loglog_slope"] = table.loglog_slope;
        return res;
    };
}

void add_mass(CLI::App& app, std::list<Command>& cmds) {
    auto& c = cmds.emplace_back();
    c.app = app.add_subcommand("mass", "Exact total mass sum_{|lambda|=N} prod 1/(m_k! k^{m_k})");
    auto n_min = std::make_shared<int>(1);
    auto n_max = std::make_shared<int>(25);
    c.app->add_option("--N-min", *n_min, "First N")->capture_default_str();
    c.app->add_option("--N-max", *n_max, "Last N")->capture_default_str();
    c.run = [=](const Common&) {
        require(*n_min >= 0 && *n_min <= *n_max, "mass: 0 <= N-min <= N-max");
        Result res;
        res.table.columns = {"N", "partitions", "total_mass"};
        bool exact = true, counts = true;
        for (int N = *n_min; N <= *n_max; ++N) {
            const auto parts = enumerate_partitions(N);
            Rational total = 0;
            for (const auto& p : parts) total += diagonal_second_moment(p);
            res.table.rows.push_back({std::int64_t{N}, as_int(parts.size()), total.str()});
            exact = exact && total == 1;
            counts = counts && parts.size() == partition_count(N);
        }
        res.checks.push_back({"total_mass_is_one", exact, ""});
        res.checks.push_back({"partition_counts", counts, "enumeration vs pentagonal recurrence"});
        return res;
    };
}

void add_ballot(CLI::App& app, std::list<Command>& cmds) {
    auto& c = cmds.emplace_back();
    c.common.samples = 100000;
    c.app = app.add_subcommand("ballot", "Gaussian walk staying below a barrier");
    auto as = std::make_shared<std::vector<double>>(std::vector<double>{1, 2, 4});
    auto ns = std::make_shared<std::vector<int>>(std::vector<int>{16, 64, 256});
    auto variance = std::make_shared<double>(1.0);
    auto offset = std::make_shared<std::string>("flat");
    auto lo = std::make_shared<double>(0.2);
    auto hi = std::make_shared<double>(5.0);
    c.app->add_option("--a", *as, "Barrier heights")->delimiter(',')->capture_default_str();
    c.app->add_option("--n", *ns, "Walk lengths")->delimiter(',')->capture_default_str();
    c.app->add_option("--variance", *variance, "Step variance")->capture_default_str();
    c.app->add_option("--offset", *offset, "Barrier schedule")
        ->check(CLI::IsMember({"flat", "upper", "lower"}))
        ->capture_default_str();
    c.app->add_option("--band-low", *lo)->capture_default_str();
    c.app->add_option("--band-high", *hi)->capture_default_str();
    c.run = [=](const Common& common) {
        Result res;
        res.table.columns = {"a", "n", "samples", "estimate", "std_error", "scale", "ratio", "in_band", "seed"};
        bool in_band = true, monotone = true;
        auto sorted = *as;
        std::sort(sorted.begin(), sorted.end());
        for (int n : *ns) {
            double prev = -1.0;
            for (double a : sorted) {
                BarrierSpec spec = *offset == "upper"   ? BarrierSpec::upper(a, n)
                                   : *offset == "lower" ? BarrierSpec::lower(a, n)
                                                        : BarrierSpec::flat(a, n);
                const std::vector<double> vars{*variance};
                // The same walks are reused across a, so the estimates are ordered in a.
                const auto est = ballot_probability_mc(spec, vars, common.samples, Seed{common.seed, 0}, common.workers);
                const double scale = std::min(1.0, a / std::sqrt(static_cast<double>(n)));
                const double ratio = est.mean / scale;
                const bool ok = ratio >= *lo && ratio <= *hi;
                in_band = in_band && ok;
                monotone = monotone && est.mean >= prev;
                prev = est.mean;
                res.table.rows.push_back({a, std::int64_t{n}, as_int(est.samples), est.mean, est.std_error, scale,
                                          ratio, ok, Cell{common.seed}});
            }
        }
        res.checks.push_back({"band", in_band, "[" + format_double(*lo) + ", " + format_double(*hi) + "]"});
        res.checks.push_back({"monotone_in_a", monotone, ""});
        res.extras["band"] = {*lo, *hi};
        return res;
    };
}

void add_event(CLI::App& app, std::list<Command>& cmds) {
    auto& c = cmds.emplace_back();
    c.common.samples = 100000;
    c.app = app.add_subcommand("event", "Probability of the barrier events G, G on an angle grid, or L");
    auto kind = std::make_shared<std::string>("G");
    auto K = std::make_shared<double>(0.0);
    auto r = std::make_shared<double>(0.0);
    auto theta = std::make_shared<double>(0.0);
    auto As = std::make_shared<std::vector<double>>();
    c.app->add_option("--kind", *kind, "G, G-grid or L")
        ->check(CLI::IsMember({"G", "G-grid", "L"}))
        ->capture_default_str();
    c.app->add_option("--K", *K, "Truncation (0: e^6 for G, 10^4 for L)");
    c.app->add_option("--r", *r, "Radius (0: 1 for G, e^{-1/40} for L)");
    c.app->add_option("--theta", *theta, "Angle")->capture_default_str();
    c.app->add_option("--A", *As, "Barrier heights")->delimiter(',');
    c.run = [=](const Common& common) {
        const bool is_L = *kind == "L";
        const double k = *K > 0.0 ? *K : (is_L ? 1e4 : std::exp(6.0));
        const double rr = *r > 0.0 ? *r : (is_L ? std::exp(-1.0 / 40.0) : 1.0);
        std::vector<double> as = *As;
        if (as.empty()) as = is_L ? std::vector<double>{2.0} : std::vector<double>{1.0, 2.0, std::sqrt(std::log(k))};
        std::sort(as.begin(), as.end());

        std::int64_t need = 0;
        if (is_L) {
            need = last_index_below_exp(log_K_r(rr, k));
        } else {
            require(k >= 3.0, "event G: K >= 3");
            need = last_index_below_exp(static_cast<int>(std::floor(std::log(k))));
        }
        // validate every A on a zero sample before spending time on draws
        const std::vector<cplx> zeros(static_cast<std::size_t>(std::max<std::int64_t>(need, 1)));
        for (double a : as) {
            if (is_L)
                (void)event_L_holds(zeros, rr, *theta, k, a);
            else
                (void)event_G_holds(zeros, rr, *theta, k, a);
        }

        const auto hits = parallel_map<std::vector<double>>(common.samples, common.workers, [&](std::size_t i) {
            GaussianStream stream(split(Seed{common.seed, 0}, i));
            const auto x = draw_gaussians(stream, static_cast<std::size_t>(need));
            std::vector<double> h(as.size());
            for (std::size_t j = 0; j < as.size(); ++j) {
                bool holds = false;
                if (is_L)
                    holds = event_L_holds(x, rr, *theta, k, as[j]);
                else if (*kind == "G-grid")
                    holds = event_G_grid_holds(x, rr, k, as[j]);
                else
                    holds = event_G_holds(x, rr, *theta, k, as[j]);
                h[j] = holds ? 1.0 : 0.0;
            }
            return h;
        });

        Result res;
        res.table.columns = {"kind", "K", "r", "theta", "A", "samples", "probability", "std_error", "failure", "scale",
                             "ratio", "seed"};
        bool monotone = true, in_band = true;
        double prev_fail = INFINITY;
        for (std::size_t j = 0; j < as.size(); ++j) {
            std::vector<double> col(hits.size());
            for (std::size_t i = 0; i < hits.size(); ++i) col[i] = hits[i][j];
            const auto est = summarize(col, Seed{common.seed, 0});
            double scale = 1.0, ratio = est.mean;
            if (is_L) {
                scale = as[j] / std::sqrt(static_cast<double>(log_K_r(rr, k)));
                ratio = est.mean / scale;
                in_band = in_band && ratio >= 0.2 && ratio <= 5.0;
            }
            const double fail = 1.0 - est.mean;
            monotone = monotone && fail <= prev_fail;
            prev_fail = fail;
            res.table.rows.push_back({*kind, k, rr, *theta, as[j], as_int(est.samples), est.mean, est.std_error, fail,
                                      scale, ratio, Cell{common.seed}});
        }
        res.checks.push_back({"failure_nonincreasing_in_A", monotone, ""});
        if (is_L) res.checks.push_back({"band", in_band, "P / (A / sqrt(log K_r)) in [0.2, 5]"});
        return res;
    };
}

void add_com_check(CLI::App& app, std::list<Command>& cmds) {
    auto& c = cmds.emplace_back();
    c.app = app.add_subcommand("com-check", "Tilted expectation vs. shifted barrier probability");
    auto K = std::make_shared<double>(20.0);
    auto r = std::make_shared<double>(1.0);
    auto A = std::make_shared<double>(2.0);
    auto left = std::make_shared<std::size_t>(100000);
    auto right = std::make_shared<std::size_t>(1000000);
    auto sigmas = std::make_shared<double>(5.0);
    c.app->add_option("--K", *K)->capture_default_str();
    c.app->add_option("--r", *r)->capture_default_str();
    c.app->add_option("--A", *A)->capture_default_str();
    c.app->add_option("--samples-left", *left)->capture_default_str();
    c.app->add_option("--samples-right", *right)->capture_default_str();
    c.app->add_option("--sigmas", *sigmas, "Agreement tolerance in combined standard errors")->capture_default_str();
    c.run = [=](const Common& common) {
        const auto [l, rt] = change_of_measure_check(*K, *r, *A, *left, *right, Seed{common.seed, 0}, common.workers);
        Result res;
        res.table.columns = {"side", "K", "r", "A", "samples", "mean", "std_error", "seed"};
        res.table.rows.push_back({std::string("left"), *K, *r, *A, as_int(l.samples), l.mean, l.std_error,
                                  Cell{common.seed}});
        res.table.rows.push_back({std::string("right"), *K, *r, *A, as_int(rt.samples), rt.mean, rt.std_error,
                                  Cell{common.seed}});
        const bool ok = agree_within(l.mean, l.std_error, rt.mean, rt.std_error, *sigmas);
        res.checks.push_back({"sides_agree", ok, "within " + format_double(*sigmas) + " combined se"});
        res.extras["closed_form"] = circle_mean_closed_form(*K, *r);
        return res;
    };
}

void add_blocks(CLI::App& app, std::list<Command>& cmds) {
    auto& c = cmds.emplace_back();
    c.app = app.add_subcommand("blocks", "Block variances and covariances with their deterministic bounds");
    auto rs = std::make_shared<std::vector<double>>(std::vector<double>{0.98, std::exp(-1.0 / 40.0)});
    auto thetas = std::make_shared<std::vector<double>>(
        std::vector<double>{0.1, 0.5, std::numbers::pi / 2.0, std::numbers::pi});
    auto K = std::make_shared<double>(1e12);
    auto m_min = std::make_shared<int>(2);
    auto m_max = std::make_shared<int>(8);
    auto tol = std::make_shared<double>(1e-12);
    c.app->add_option("--r", *rs)->delimiter(',')->capture_default_str();
    c.app->add_option("--theta", *thetas)->delimiter(',')->capture_default_str();
    c.app->add_option("--K", *K)->capture_default_str();
    c.app->add_option("--m-min", *m_min)->capture_default_str();
    c.app->add_option("--m-max", *m_max)->capture_default_str();
    c.app->add_option("--tolerance", *tol)->capture_default_str();
    c.run = [=](const Common&) {
        require(*m_min >= 1 && *m_min <= *m_max, "blocks: 1 <= m-min <= m-max");
        Result res;
        res.table.columns = {"r",         "theta",     "m",         "k_first",     "k_last",     "sigma2",
                             "covariance", "rho",      "var_upper", "cov_bound",   "var_applies", "var_ok",
                             "cov_ok",     "log_K_r",  "M"};
        bool all_var = true, all_cov = true;
        for (double r : *rs) {
            for (double theta : *thetas) {
                const auto wb = block_stats(r, theta, *K);
                for (int m = *m_min; m <= *m_max; ++m) {
                    const auto b = block_moments(r, theta, m);
                    const double em1 = std::exp(static_cast<double>(m - 1));
                    const double upper = 0.5 + 1.0 / (2.0 * em1);
                    const double cov_bound = std::numbers::pi / (std::abs(theta) * em1);
                    const bool applies = m <= wb.log_Kr;  // e^m <= K_r
                    const bool var_ok = !applies || (b.sigma2 >= 0.25 - *tol && b.sigma2 <= upper + *tol);
                    const bool cov_ok = std::abs(b.covariance) <= cov_bound + *tol;
                    all_var = all_var && var_ok;
                    all_cov = all_cov && cov_ok;
                    res.table.rows.push_back({r, theta, std::int64_t{m}, b.k_first, b.k_last, b.sigma2, b.covariance,
                                              b.rho, upper, cov_bound, applies, var_ok, cov_ok,
                                              std::int64_t{wb.log_Kr}, std::int64_t{wb.M}});
                }
            }
        }
        res.checks.push_back({"variance_bounds", all_var, "1/4 <= sigma^2 <= 1/2 + 1/(2 e^{m-1}) where e^m <= K_r"});
        res.checks.push_back({"covariance_bound", all_cov, "|cov| <= pi / (|theta| e^{m-1})"});
        return res;
    };
}

void add_bivariate(CLI::App& app, std::list<Command>& cmds) {
    auto& c = cmds.emplace_back();
    c.common.samples = 100000;
    c.app = app.add_subcommand("bivariate", "Bivariate normal density against its independent dominating form");
    auto rhos = std::make_shared<std::vector<double>>(std::vector<double>{-0.3, -0.05, 0.05, 0.3});
    auto params = std::make_shared<BivariateParams>();
    auto grid = std::make_shared<int>(100);
    auto norm_grid = std::make_shared<int>(400);
    auto tol = std::make_shared<double>(1e-12);
    c.app->add_option("--rho", *rhos)->delimiter(',')->capture_default_str();
    c.app->add_option("--mu1", params->mu1)->capture_default_str();
    c.app->add_option("--mu2", params->mu2)->capture_default_str();
    c.app->add_option("--var1", params->var1)->capture_default_str();
    c.app->add_option("--var2", params->var2)->capture_default_str();
    c.app->add_option("--grid", *grid, "Points per axis of the domination grid")->capture_default_str();
    c.app->add_option("--norm-grid", *norm_grid, "Points per axis for the normalization")->capture_default_str();
    c.app->add_option("--tolerance", *tol)->capture_default_str();
    c.run = [=](const Common& common) {
        require(*grid >= 2 && *norm_grid >= 2, "bivariate: grids need at least 2 points per axis");
        Result res;
        res.table.columns = {"rho", "grid_points", "max_excess", "min_ratio", "normalization", "quadrant_mc",
                             "quadrant_se", "quadrant_bound", "seed"};
        bool dominated = true, normalized = true, event_ok = true;
        for (std::size_t idx = 0; idx < rhos->size(); ++idx) {
            BivariateParams p = *params;
            p.rho = (*rhos)[idx];
            const double s1 = std::sqrt(p.var1), s2 = std::sqrt(p.var2);
            double max_excess = -INFINITY, min_ratio = INFINITY;
            for (int i = 0; i < *grid; ++i) {
                for (int j = 0; j < *grid; ++j) {
                    const double x1 = p.mu1 + s1 * (-6.0 + 12.0 * i / (*grid - 1));
                    const double x2 = p.mu2 + s2 * (-6.0 + 12.0 * j / (*grid - 1));
                    const double f = bivariate_density(p, x1, x2), g = dominating_density(p, x1, x2);
                    max_excess = std::max(max_excess, f - g);
                    min_ratio = std::min(min_ratio, g / f);
                }
            }
            // midpoint rule over +-8 sigma
            const double h1 = 16.0 * s1 / *norm_grid, h2 = 16.0 * s2 / *norm_grid;
            std::vector<double> cells;
            cells.reserve(static_cast<std::size_t>(*norm_grid) * static_cast<std::size_t>(*norm_grid));
            for (int i = 0; i < *norm_grid; ++i)
                for (int j = 0; j < *norm_grid; ++j)
                    cells.push_back(bivariate_density(p, p.mu1 - 8.0 * s1 + (i + 0.5) * h1,
                                                      p.mu2 - 8.0 * s2 + (j + 0.5) * h2));
            const double mass = pairwise_sum(cells) * h1 * h2;

            const Seed seed{common.seed, idx};
            const auto inside = parallel_map<double>(common.samples, common.workers, [&](std::size_t i) {
                GaussianStream stream(split(seed, i));
                const auto [y1, y2] = sample_bivariate(p, stream);
                return (y1 > p.mu1 && y2 > p.mu2) ? 1.0 : 0.0;
            });
            const auto est = summarize(inside, seed);
            const double a = std::abs(p.rho);
            const double bound = std::sqrt((1.0 + a) / (1.0 - a)) * 0.25;

            dominated = dominated && max_excess <= *tol;
            normalized = normalized && std::abs(mass - 1.0) <= 1e-6;
            event_ok = event_ok && est.mean <= bound + 4.0 * est.std_error;
            res.table.rows.push_back({p.rho, std::int64_t{*grid} * *grid, max_excess, min_ratio, mass, est.mean,
                                      est.std_error, bound, Cell{common.seed}});
        }
        res.checks.push_back({"pointwise_domination", dominated, "density <= dominating + tolerance"});
        res.checks.push_back({"normalization", normalized, "|mass - 1| <= 1e-6"});
        res.checks.push_back({"quadrant_event", event_ok, "MC probability <= bound + 4 se"});
        return res;
    };
}

void add_steinhaus(CLI::App& app, std::list<Command>& cmds) {
    auto& c = cmds.emplace_back();
    c.common.samples = 10000;
    c.app = app.add_subcommand("steinhaus", "Partial sums of a Steinhaus random multiplicative function");
    auto xs = std::make_shared<std::vector<double>>(std::vector<double>{100.0});
    c.app->add_option("--x", *xs, "Cutoffs")->delimiter(',')->capture_default_str();
    c.run = [=](const Common& common) {
        Result res;
        res.table.columns = {"x",        "samples",     "mean_square", "mean_square_se",
                             "mean_abs", "mean_abs_se", "compensated", "seed"};
        for (double x : *xs) {
            const auto est = estimate_steinhaus(x, common.samples, Seed{common.seed, 0}, common.workers);
            res.table.rows.push_back({x, as_int(common.samples), est.mean_square.mean, est.mean_square.std_error,
                                      est.mean_abs.mean, est.mean_abs.std_error, est.compensated,
                                      Cell{common.seed}});
            const double target = std::floor(x);
            const bool ok = std::abs(est.mean_square.mean - target) <= 4.0 * est.mean_square.std_error;
            res.checks.push_back({"mean_square x=" + format_double(x), ok,
                                  "target " + format_double(target) + ", mean " +
                                      format_double(est.mean_square.mean)});
        }
        return res;
    };
}

void add_ff(CLI::App& app, std::list<Command>& cmds) {
    auto& c = cmds.emplace_back();
    c.common.samples = 2000;
    c.app = app.add_subcommand("ff", "Steinhaus model on monic polynomials over F_q");
    auto q = std::make_shared<int>(7);
    auto N = std::make_shared<int>(5);
    c.app->add_option("--q", *q, "Field size (prime)")->capture_default_str();
    c.app->add_option("--N", *N, "Degree")->capture_default_str();
    c.run = [=](const Common& common) {
        require(common.samples >= 2, "ff: samples >= 2");
        const Seed seed{common.seed, 0};
        FFModel model(*q, *N, split(seed, 0));

        double euler_err = 0.0, exp_err = 0.0;
        const auto euler = model.euler_product();
        const auto expo = model.exp_identity();
        for (int n = 0; n <= *N; ++n) {
            const auto un = static_cast<std::size_t>(n);
            euler_err = std::max(euler_err, std::abs(euler[un] - model.A(n)));
            exp_err = std::max(exp_err, std::abs(expo[un] - model.A(n)));
        }
        bool counts_ok = true;
        for (int d = 1; d <= *N; ++d)
            counts_ok = counts_ok && model.irreducible_count(d) ==
                                         count_irreducibles(static_cast<std::uint64_t>(*q), d);

        std::vector<double> values(common.samples);
        for (std::size_t i = 0; i < common.samples; ++i) {
            model.resample(split(seed, i));
            values[i] = std::norm(model.A(*N));
        }
        const auto est = summarize(values, seed, 1.0);

        Result res;
        res.table.columns = {"q",           "N",        "samples",         "mean", "std_error",
                             "euler_max_error", "exp_max_error", "irreducibles_ok", "seed"};
        res.table.rows.push_back({std::int64_t{*q}, std::int64_t{*N}, as_int(est.samples), est.mean, est.std_error,
                                  euler_err, exp_err, counts_ok, Cell{common.seed}});
        res.checks.push_back({"second_moment", std::abs(est.mean - 1.0) <= 4.0 * est.std_error,
                              "mean " + format_double(est.mean) + " se " + format_double(est.std_error)});
        res.checks.push_back({"euler_product", euler_err <= 1e-9, format_double(euler_err)});
        res.checks.push_back({"exp_identity", exp_err <= 1e-9, format_double(exp_err)});
        res.checks.push_back({"irreducible_counts", counts_ok, "sieve vs Moebius formula"});
        return res;
    };
}

void add_series_selftest(CLI::App& app, std::list<Command>& cmds) {
    auto& c = cmds.emplace_back();
    c.app = app.add_subcommand("series-selftest", "Cross-checks of the power-series engines");
    auto n_max = std::make_shared<std::size_t>(4096);
    c.app->add_option("--N-max", *n_max, "Largest degree for the engine comparison")->capture_default_str();
    c.run = [=](const Common& common) {
        Result res;
        res.table.columns = {"check", "N", "max_abs_error", "tolerance", "pass"};
        auto add = [&](const std::string& name, std::size_t N, double err, double tol) {
            const bool ok = err <= tol;
            res.table.rows.push_back({name, as_int(N), err, tol, ok});
            res.checks.push_back({name + " N=" + std::to_string(N), ok, format_double(err)});
        };
        GaussianStream stream(Seed{common.seed, 0});

        std::vector<std::size_t> sizes;
        for (std::size_t N = 64; N < *n_max; N *= 4) sizes.push_back(N);
        sizes.push_back(*n_max);
        for (std::size_t N : sizes) {
            const auto x = draw_gaussians(stream, N);
            const auto a = chaos_coefficients(x, N, static_cast<double>(N), ExpEngine::Recurrence);
            const auto b = chaos_coefficients(x, N, static_cast<double>(N), ExpEngine::DivideConquer);
            double err = 0.0;
            for (std::size_t n = 0; n <= N; ++n) err = std::max(err, std::abs(a[n] - b[n]));
            add("exp_engines", N, err, 1e-9);
        }
        {
            const std::size_t D = 12;
            ComplexSeries s(D), t(D);
            for (std::size_t k = 1; k <= D; ++k) {
                s[k] = stream.next_complex_gaussian();
                t[k] = stream.next_complex_gaussian();
            }
            const auto lhs = exp_series(s + t, D);
            const auto rhs = multiply(exp_series(s, D), exp_series(t, D), D);
            double err = 0.0;
            for (std::size_t n = 0; n <= D; ++n) err = std::max(err, std::abs(lhs[n] - rhs[n]));
            add("exp_homomorphism", D, err, 1e-9);
        }
        {
            const std::size_t D = 256;
            ComplexSeries a(D), b(D);
            for (std::size_t k = 0; k <= D; ++k) {
                a[k] = stream.next_complex_gaussian();
                b[k] = stream.next_complex_gaussian();
            }
            const auto fast = multiply(a, b, D);
            double err = 0.0;
            for (std::size_t n = 0; n <= D; ++n) {
                cplx direct{};
                for (std::size_t i = 0; i <= n; ++i) direct += a[i] * b[n - i];
                err = std::max(err, std::abs(fast[n] - direct));
            }
            add("multiply_schoolbook", D, err, 1e-9);
        }
        {
            const std::size_t D = 16;
            ComplexSeries f(D);
            for (std::size_t k = 0; k <= D; ++k) f[k] = stream.next_complex_gaussian();
            const double r = 0.9;
            const int points = 4096;
            std::vector<double> vals(points);
            for (int j = 0; j < points; ++j)
                vals[static_cast<std::size_t>(j)] =
                    std::norm(f.evaluate(std::polar(r, 2.0 * std::numbers::pi * j / points)));
            const double quad = pairwise_sum(vals) / points;
            const double exact = parseval_power_sum(f, r);
            add("parseval_quadrature", D, std::abs(quad - exact) / exact, 1e-9);
        }
        {
            double worst = -INFINITY;
            for (std::size_t N = 1; N <= 30; ++N)
                for (std::size_t m = 1; m <= N; ++m)
                    worst = std::max(worst, smooth_partition_weight(N, m) - rankin_bound(N, m, 1.0));
            add("rankin_dominates", 30, std::max(worst, 0.0), 0.0);
        }
        return res;
    };
}

// ---------------------------------------------------------------------------
// Config files
// ---------------------------------------------------------------------------

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct ConfigLine {
    int line = 0;
    std::string key;
};

// Structural validation with line numbers; CLI11 then reads the file itself.
std::optional<std::string> validate_config(const std::string& path, CLI::App& app, std::vector<ConfigLine>& keys) {
    std::ifstream in(path);
    if (!in) return path + ": cannot open config file";
    static const std::regex section_re(R"(^\[([A-Za-z][\w-]*)\]$)");
    static const std::regex pair_re(R"(^([A-Za-z][\w.-]*)\s*=\s*(\S.*)$)");
    std::string raw, section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        const std::string where = path + ":" + std::to_string(line_no) + ": ";
        std::smatch m;
        if (std::regex_match(line, m, section_re)) {
            section = m[1];
            if (app.get_subcommand_no_throw(section) == nullptr) return where + "unknown section [" + section + "]";
            continue;
        }
        if (!std::regex_match(line, m, pair_re)) return where + "expected 'key = value'";
        std::string key = m[1];
        std::string sub = section;
        if (const auto dot = key.find('.'); dot != std::string::npos) {
            sub = key.substr(0, dot);
            key = key.substr(dot + 1);
        }
        if (sub.empty()) return where + "'" + key + "' must sit under a [subcommand] section";
        CLI::App* target = app.get_subcommand_no_throw(sub);
        if (target == nullptr) return where + "unknown subcommand '" + sub + "'";
        if (key == "config") return where + "nested config files are not supported";
        if (target->get_option_no_throw("--" + key) == nullptr)
            return where + "unknown key '" + key + "' for " + sub;
        keys.push_back({line_no, key});
    }
    return std::nullopt;
}

std::optional<std::string> find_config_arg(const std::vector<std::string>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
    }
    return std::nullopt;
}

// Canonical experiment description: the resolved options minus those that
// cannot change any emitted number.
std::string canonical_config(const CLI::App& sub) {
    std::istringstream all(sub.config_to_str(true, false));
    std::string line, out;
    while (std::getline(all, line)) {
        const auto eq = line.find('=');
        const std::string key = trim(line.substr(0, eq));
        if (key == "workers" || key == "out" || key == "format" || key == "check" || key == "config") continue;
        out += line + '\n';
    }
    return out;
}

void write_outputs(const Result& res, const Common& common, const json& manifest, std::ostream& out) {
    const auto emit = [&](std::ostream& os) {
        if (common.format == "json") {
            json doc = table_json(res.table);
            doc["manifest"] = manifest;
            os << doc.dump(2) << '\n';
        } else {
            write_csv(res.table, os);
        }
    };
    if (common.out.empty()) {
        emit(out);
        return;
    }
    {
        std::ofstream f(common.out);
        if (!f) throw std::runtime_error("cannot write " + common.out);
        emit(f);
    }
    {
        std::ofstream f(common.out + ".manifest.json");
        if (!f) throw std::runtime_error("cannot write " + common.out + ".manifest.json");
        f << manifest.dump(2) << '\n';
    }
    if (!res.plot.empty()) {
        std::ofstream f(common.out + ".plot.dat");
        for (const auto& [x, y] : res.plot) f << format_double(x) << ' ' << format_double(y) << '\n';
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Holomorphic multiplicative chaos experiments", "hmc"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Config file: [subcommand] sections of key = value; flags override it");
    app.set_version_flag("--version", HMC_VERSION);

    std::list<Command> cmds;
    add_sample(app, cmds);
    add_moment(app, cmds);
    add_decay(app, cmds);
    add_mass(app, cmds);
    add_ballot(app, cmds);
    add_event(app, cmds);
    add_com_check(app, cmds);
    add_blocks(app, cmds);
    add_bivariate(app, cmds);
    add_steinhaus(app, cmds);
    add_ff(app, cmds);
    add_series_selftest(app, cmds);
    for (auto& c : cmds) {
        c.app->add_option("--seed", c.common.seed, "Root seed")->capture_default_str();
        c.app->add_option("--samples", c.common.samples, "Monte Carlo samples per grid point")->capture_default_str();
        c.app->add_option("--workers", c.common.workers, "Worker threads (0: all cores)")->capture_default_str();
        c.app->add_option("--out", c.common.out, "Output path (default: stdout)");
        c.app->add_option("--format", c.common.format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}))
            ->capture_default_str();
        c.app->add_flag("--check", c.common.check, "Exit 4 when an acceptance check fails");
    }

    std::vector<ConfigLine> config_keys;
    const auto config_path = find_config_arg(args);
    if (config_path) {
        if (auto problem = validate_config(*config_path, app, config_keys)) {
            err << "config error: " << *problem << '\n';
            return kConfigError;
        }
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kOk;
        }
        std::string where;
        const std::string msg = e.what();
        for (const auto& k : config_keys)
            if (msg.find("--" + k.key + ":") != std::string::npos || msg.find(" " + k.key + " ") != std::string::npos ||
                msg.find("--" + k.key + " ") != std::string::npos) {
                where = *config_path + ":" + std::to_string(k.line) + ": ";
                break;
            }
        err << "config error: " << where << msg << '\n';
        return kConfigError;
    }

    Command* chosen = nullptr;
    for (auto& c : cmds)
        if (c.app->parsed()) chosen = &c;

    try {
        const Common& common = chosen->common;
        const Result res = chosen->run(common);
        const std::string canonical = canonical_config(*chosen->app);
        char hash[17];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));
        json manifest = {{"subcommand", chosen->app->get_name()},
                         {"version", HMC_VERSION},
                         {"seed", common.seed},
                         {"replicates", {0, common.samples ? common.samples - 1 : 0}},
                         {"workers", common.workers},
                         {"config_hash", std::string("fnv1a64:") + hash},
                         {"config", canonical}};
        if (!res.extras.empty()) manifest["report"] = res.extras;
        json checks = json::array();
        for (const auto& ch : res.checks) checks.push_back({{"name", ch.name}, {"pass", ch.pass}});
        manifest["checks"] = checks;
        write_outputs(res, common, manifest, out);

        if (common.check) {
            bool all = true;
            for (const auto& ch : res.checks) {
                err << "check " << ch.name << ": " << (ch.pass ? "PASS" : "FAIL");
                if (!ch.detail.empty()) err << " (" << ch.detail << ")";
                err << '\n';
                all = all && ch.pass;
            }
            if (!all) return kCheckFailure;
        }
        return kOk;
    } catch (const PreconditionError& e) {
        err << "precondition violated: " << e.what() << '\n';
        return kPreconditionViolation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace hmc::cli
