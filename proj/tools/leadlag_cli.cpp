// leadlag: command-line front end for the lead-lag pipeline.
//
//   leadlag metrics | cluster | synth | synth-bench | permtest | backtest | eval
//
// Every run writes <out>/<command>.config.ini; feeding it back through
// `leadlag --config <file> <command>` reproduces the outputs byte for byte.
// Exit codes: 0 success, 1 runtime or data error, 2 usage error.

#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "leadlag/backtest.hpp"
#include "leadlag/bench.hpp"
#include "leadlag/clustering.hpp"
#include "leadlag/evaluation.hpp"
#include "leadlag/io.hpp"
#include "leadlag/metrics.hpp"
#include "leadlag/network.hpp"
#include "leadlag/panel.hpp"
#include "leadlag/plot.hpp"
#include "leadlag/synthetic.hpp"

namespace fs = std::filesystem;
using namespace leadlag;
using io::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string out = ".";
    std::uint64_t seed = 0;
    unsigned jobs = 1;
};

struct MetricFlags {
    std::string functional = "ccf-auc";
    std::string corr;  // empty: pearson for ccf metrics, must stay empty for signature
    int max_lag = 5;
    int mi_bins = 8;

    LeadLagMetricSpec resolve() const {
        LeadLagMetricSpec s;
        try {
            s.functional = parse_functional(functional);
            if (s.functional == Functional::Signature && !corr.empty())
                throw UsageError("--corr cannot be combined with --functional signature");
            s.correlation.type = corr.empty() ? CorrelationType::Pearson : parse_correlation_type(corr);
            s.correlation.mi_bins = mi_bins;
            s.max_lag = max_lag;
            s.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        return s;
    }
};

struct PanelFlags {
    std::string input;
    std::string kind = "returns";
    double min_fraction = 0.5;

    LoadOptions options() const {
        LoadOptions o;
        o.min_fraction = min_fraction;
        if (kind == "levels") o.kind = PanelKind::Levels;
        else if (kind == "returns") o.kind = PanelKind::Differences;
        else throw UsageError("--panel-kind must be 'levels' or 'returns'");
        return o;
    }

    LoadResult load() const {
        auto r = load_panel(input, options());
        for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
        return r;
    }
};

void add_common(CLI::App* s, Common& c) {
    s->add_option("--out", c.out, "Output directory")->capture_default_str();
    s->add_option("--seed", c.seed, "Master seed")->capture_default_str();
    s->add_option("--jobs", c.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

void add_metric(CLI::App* s, MetricFlags& m) {
    s->add_option("--functional", m.functional, "ccf-lag1 | ccf-auc | signature")->capture_default_str();
    s->add_option("--corr", m.corr, "pearson | kendall | dcor | mi (ccf functionals only)")->capture_default_str();
    s->add_option("--max-lag", m.max_lag, "Largest lag for ccf-auc")->capture_default_str();
    s->add_option("--mi-bins", m.mi_bins, "Quantile bins for mutual information")->capture_default_str();
}

void add_panel(CLI::App* s, PanelFlags& p) {
    s->add_option("--input", p.input, "Panel CSV")->required();
    s->add_option("--panel-kind", p.kind, "levels | returns")->capture_default_str();
    s->add_option("--min-fraction", p.min_fraction, "Drop series observed on fewer rows than this fraction")
        ->capture_default_str();
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = std::string(leadlag::detail::trim(item)); !t.empty()) out.push_back(t);
    return out;
}

template <class T, class F>
std::vector<T> parse_list(const std::string& s, F&& parse, const char* flag) {
    std::vector<T> out;
    try {
        for (const auto& item : split_list(s)) out.push_back(parse(item));
    } catch (const std::exception& e) {
        throw UsageError(std::string(flag) + ": " + e.what());
    }
    if (out.empty()) throw UsageError(std::string(flag) + " is empty");
    return out;
}

double to_double(const std::string& s) {
    const auto v = leadlag::detail::parse_double(s);
    if (!v) throw std::invalid_argument("'" + s + "' is not a number");
    return *v;
}

int to_int(const std::string& s) {
    const auto v = leadlag::detail::parse_int(s);
    if (!v) throw std::invalid_argument("'" + s + "' is not an integer");
    return static_cast<int>(*v);
}

LeadLagMetricSpec parse_metric_label(const std::string& label) {
    LeadLagMetricSpec m;
    const auto slash = label.find('/');
    m.functional = parse_functional(label.substr(0, slash));
    if (slash != std::string::npos) {
        if (m.functional == Functional::Signature) throw std::invalid_argument("signature takes no correlation");
        m.correlation.type = parse_correlation_type(label.substr(slash + 1));
    } else if (m.functional != Functional::Signature) {
        throw std::invalid_argument("metric '" + label + "' needs a correlation, e.g. ccf-auc/pearson");
    }
    return m;
}

std::string file_safe(std::string s) {
    for (auto& c : s)
        if (c == '/') c = '-';
    return s;
}

fs::path prepare_out(const Common& c) {
    fs::path out(c.out);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw DataError("cannot create output directory " + c.out + ": " + ec.message());
    return out;
}

void write_snapshot(const fs::path& out, const CLI::App* sub) {
    io::write_text((out / (sub->get_name() + ".config.ini")).string(),
                   "[" + sub->get_name() + "]\n" + sub->config_to_str(true, false));
}

/// Returns panel for the ccf functionals; Signature gets normalized levels.
LeadLagMatrix compute_matrix(const TimeSeriesPanel& panel, const LeadLagMetricSpec& spec, unsigned jobs) {
    if (panel.kind == PanelKind::Differences) return leadlag_from_returns(panel, spec, jobs);
    if (spec.functional == Functional::Signature) return leadlag_matrix(normalize_series(panel), spec, jobs);
    return leadlag_matrix(to_log_returns(panel), spec, jobs);
}

TimeSeriesPanel as_returns(const TimeSeriesPanel& panel) {
    return panel.kind == PanelKind::Differences ? panel : to_log_returns(panel);
}

Algorithm resolve_algorithm(const std::string& algo, const std::string& side) {
    try {
        if (algo == "disim") {
            if (side == "left") return Algorithm::DisimLeft;
            if (side == "right") return Algorithm::DisimRight;
            throw std::invalid_argument("--side must be 'left' or 'right'");
        }
        return parse_algorithm(algo);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

// --- metrics ----------------------------------------------------------------

struct MetricsCmd {
    Common common;
    PanelFlags panel;
    MetricFlags metric;

    void run(const CLI::App* sub) const {
        const auto spec = metric.resolve();
        panel.options();
        const auto out = prepare_out(common);
        write_snapshot(out, sub);
        const auto loaded = panel.load();
        const auto S = compute_matrix(loaded.panel, spec, common.jobs);
        io::write_text((out / "leadlag_matrix.csv").string(), io::matrix_csv(S));
        io::write_json((out / "edges.json").string(), io::edge_list(S));
        std::cout << "metric " << spec.label() << ": " << S.size() << " series, " << loaded.panel.rows() << " rows\n";
    }
};

// --- cluster ----------------------------------------------------------------

struct ClusterCmd {
    Common common;
    std::string matrix;
    std::string algo = "hermitian-rw";
    std::string side = "left";
    int k = 10;
    int n_eig = 0;
    int restarts = 10;

    void run(const CLI::App* sub) const {
        const auto algorithm = resolve_algorithm(algo, side);
        if (k < 1) throw UsageError("--k must be >= 1");
        const auto out = prepare_out(common);
        write_snapshot(out, sub);
        const auto S = io::read_matrix_csv(matrix);
        if (static_cast<std::size_t>(k) > S.size())
            throw UsageError("--k " + std::to_string(k) + " exceeds the number of series (" + std::to_string(S.size()) + ")");
        SpectralConfig cfg;
        cfg.k = k;
        cfg.n_eigenvectors = n_eig;
        cfg.kmeans_restarts = restarts;
        cfg.seed = common.seed;
        try {
            cfg.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        const auto net = build_network(S);
        const auto c = cluster_network(net, algorithm, cfg);
        const auto F = meta_flow(net, c);
        const auto rank = leadingness(net, c);
        const std::string tag = to_string(algorithm);
        io::write_json((out / ("clusters_" + tag + ".json")).string(),
                       io::clustering_json(c, S.series_ids, {tag, common.seed, rank.cluster_scores}));
        io::write_json((out / ("metaflow_" + tag + ".json")).string(), io::meta_flow_json(F, rank));
        io::write_text((out / ("metaflow_" + tag + ".dot")).string(), io::meta_flow_dot(F, rank));
        io::write_text((out / ("leadingness_" + tag + ".csv")).string(), io::leadingness_csv(F, rank));
        std::cout << tag << ": " << c.k << " clusters over " << c.size() << " series\n";
    }
};

// --- synth ------------------------------------------------------------------

struct SynthCmd {
    Common common;
    std::string setting = "linear";
    double sigma = 0.0;
    int T = 0, p = 0;

    void run(const CLI::App* sub) const {
        BenchGrid g;
        g.seed = common.seed;
        if (T > 0) g.T = T;
        if (p > 0) g.p = p;
        SyntheticSpec spec;
        try {
            spec = bench_spec(g, parse_setting(setting), sigma, 0);
            spec.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        spec.seed = common.seed;
        const auto out = prepare_out(common);
        write_snapshot(out, sub);
        const auto [panel, truth] = generate(spec);
        write_panel_csv(panel, (out / "panel.csv").string());
        io::write_json((out / "truth.json").string(), io::ground_truth_json(spec, truth, panel.series_ids));
        std::cout << "wrote " << panel.rows() << " x " << panel.cols() << " " << setting << " panel\n";
    }
};

// --- synth-bench ------------------------------------------------------------

struct BenchCmd {
    Common common;
    std::string settings = "all";
    std::string sigmas = "0,0.2,0.4,0.6,0.8,1,2,3,4";
    std::string metrics = "all";
    std::string algos = "all";
    int reps = 16;
    bool k_sweep = false;
    std::string k_values = "2,4,6,8,9,10,11,12,15,20,25,30";
    int T = 0, p = 0;

    BenchGrid grid() const {
        BenchGrid g;
        g.settings = settings == "all" ? all_settings() : parse_list<Setting>(settings, parse_setting, "--settings");
        g.sigmas = parse_list<double>(sigmas, to_double, "--sigmas");
        g.metrics = metrics == "all" ? standard_metrics() : parse_list<LeadLagMetricSpec>(metrics, parse_metric_label, "--metrics");
        g.algorithms = algos == "all" ? standard_algorithms() : parse_list<Algorithm>(algos, parse_algorithm, "--algos");
        if (k_sweep) g.ks = parse_list<int>(k_values, to_int, "--k-values");
        if (reps < 1) throw UsageError("--reps must be >= 1");
        g.reps = reps;
        g.seed = common.seed;
        if (T > 0) g.T = T;
        if (p > 0) g.p = p;
        for (double s : g.sigmas)
            if (!(s >= 0.0)) throw UsageError("--sigmas must be non-negative");
        for (int k : g.ks)
            if (k < 1 || k > (p > 0 ? p : 100)) throw UsageError("--k-values must lie in [1, p]");
        return g;
    }

    void run(const CLI::App* sub) const {
        const auto g = grid();
        const auto out = prepare_out(common);
        write_snapshot(out, sub);
        const auto rows = run_bench(g, common.jobs);

        std::ostringstream csv;
        csv << "setting,sigma,rep,metric,algorithm,k,accuracy,ari\n";
        for (const auto& r : rows)
            csv << to_string(r.setting) << ',' << leadlag::detail::format_double(r.sigma) << ',' << r.rep << ',' << r.metric << ','
                << r.algorithm << ',' << r.k << ',' << leadlag::detail::format_double(r.accuracy) << ','
                << leadlag::detail::format_double(r.ari) << '\n';
        io::write_text((out / "bench.csv").string(), csv.str());

        const auto summary = summarize(rows);
        json js = json::array();
        for (const auto& s : summary)
            js.push_back({{"setting", to_string(s.setting)}, {"sigma", s.sigma}, {"metric", s.metric}, {"algorithm", s.algorithm},
                          {"k", s.k}, {"accuracy_mean", s.accuracy.mean}, {"accuracy_ci", s.accuracy.half_width},
                          {"ari_mean", s.ari.mean}, {"ari_ci", s.ari.half_width}, {"reps", s.accuracy.n}});
        io::write_json((out / "bench_summary.json").string(), js);
        write_plots(out, g, summary);
        std::cout << rows.size() << " benchmark rows written to " << (out / "bench.csv").string() << '\n';
    }

    void write_plots(const fs::path& out, const BenchGrid& g, const std::vector<BenchSummary>& summary) const {
        for (auto setting : g.settings) {
            const std::string sname = to_string(setting);
            if (k_sweep) {
                for (const auto& m : g.metrics)
                    for (auto a : g.algorithms) {
                        plot::Chart c{"ARI vs k: " + sname + ", " + m.label() + ", " + to_string(a), "k", "ARI", {}};
                        for (double sigma : g.sigmas) {
                            plot::Series s{"sigma=" + leadlag::detail::format_double(sigma), {}, {}, {}};
                            for (const auto& row : summary)
                                if (row.setting == setting && row.sigma == sigma && row.metric == m.label() &&
                                    row.algorithm == to_string(a)) {
                                    s.x.push_back(row.k);
                                    s.y.push_back(row.ari.mean);
                                    s.half_width.push_back(row.ari.half_width);
                                }
                            c.series.push_back(std::move(s));
                        }
                        io::write_text((out / ("ari_vs_k_" + sname + "_" + file_safe(m.label()) + "_" + to_string(a) + ".svg")).string(),
                                       plot::render_svg(c));
                    }
                continue;
            }
            plot::Chart acc{"Edge accuracy: " + sname, "sigma", "accuracy", {}};
            for (const auto& m : g.metrics) {
                plot::Series s{m.label(), {}, {}, {}};
                for (const auto& row : summary)
                    if (row.setting == setting && row.metric == m.label() && row.algorithm == to_string(g.algorithms.front())) {
                        s.x.push_back(row.sigma);
                        s.y.push_back(row.accuracy.mean);
                        s.half_width.push_back(row.accuracy.half_width);
                    }
                acc.series.push_back(std::move(s));
            }
            io::write_text((out / ("accuracy_" + sname + ".svg")).string(), plot::render_svg(acc));
            for (const auto& m : g.metrics) {
                plot::Chart c{"ARI: " + sname + ", " + m.label(), "sigma", "ARI", {}};
                for (auto a : g.algorithms) {
                    plot::Series s{to_string(a), {}, {}, {}};
                    for (const auto& row : summary)
                        if (row.setting == setting && row.metric == m.label() && row.algorithm == to_string(a)) {
                            s.x.push_back(row.sigma);
                            s.y.push_back(row.ari.mean);
                            s.half_width.push_back(row.ari.half_width);
                        }
                    c.series.push_back(std::move(s));
                }
                io::write_text((out / ("ari_" + sname + "_" + file_safe(m.label()) + ".svg")).string(), plot::render_svg(c));
            }
        }
    }
};

// --- permtest ---------------------------------------------------------------

struct PermCmd {
    Common common;
    PanelFlags panel;
    MetricFlags metric;
    int n_mc = 200;

    void run(const CLI::App* sub) const {
        const auto spec = metric.resolve();
        panel.options();
        if (n_mc < 1) throw UsageError("--n-mc must be >= 1");
        const auto out = prepare_out(common);
        write_snapshot(out, sub);
        const auto returns = as_returns(panel.load().panel);
        const auto r = permutation_test_largest_eigenvalue(returns, spec, n_mc, common.seed, common.jobs);
        json j;
        j["metric"] = spec.label();
        j["statistic"] = "largest |eigenvalue| of i(A - A^T)";
        j["observed"] = r.observed_statistic;
        j["n_mc"] = r.n_monte_carlo;
        j["p_value"] = r.p_value;
        j["null_samples"] = r.null_samples;
        io::write_json((out / "permtest.json").string(), j);
        std::cout << "observed " << r.observed_statistic << ", p-value " << r.p_value << " (n_mc=" << n_mc << ")\n";
    }
};

// --- backtest ---------------------------------------------------------------

struct BacktestCmd {
    Common common;
    PanelFlags panel;
    MetricFlags metric;
    std::string algo = "hermitian-rw";
    std::string side = "left";
    BacktestConfig cfg;
    std::string benchmark;
    bool ablate = false;
    int n_mc = 200;

    void run(const CLI::App* sub) const {
        const auto spec = metric.resolve();
        const auto algorithm = resolve_algorithm(algo, side);
        panel.options();
        BacktestConfig c = cfg;
        c.seed = common.seed;
        try {
            c.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        if (ablate && n_mc < 1) throw UsageError("--n-mc must be >= 1");
        const auto out = prepare_out(common);
        write_snapshot(out, sub);

        auto returns = as_returns(panel.load().panel);
        std::vector<double> market;
        if (!benchmark.empty()) {
            const auto it = std::find(returns.series_ids.begin(), returns.series_ids.end(), benchmark);
            if (it == returns.series_ids.end()) throw DataError("benchmark column '" + benchmark + "' not found in " + panel.input);
            const auto col = static_cast<Eigen::Index>(it - returns.series_ids.begin());
            market.assign(returns.values.col(col).data(), returns.values.col(col).data() + returns.values.rows());
            Eigen::MatrixXd rest(returns.values.rows(), returns.values.cols() - 1);
            for (Eigen::Index j = 0, o = 0; j < returns.values.cols(); ++j)
                if (j != col) rest.col(o++) = returns.values.col(j);
            returns.values = std::move(rest);
            returns.series_ids.erase(it);
        }
        if (c.k > static_cast<int>(returns.cols()))
            throw UsageError("--k " + std::to_string(c.k) + " exceeds the number of series (" + std::to_string(returns.cols()) + ")");

        BacktestReport rep;
        json ablation;
        if (ablate) {
            const auto a = permuted_cluster_ablation(returns, spec, algorithm, c, n_mc, common.jobs);
            rep = a.observed;
            if (!market.empty()) rep = run_backtest(returns, spec, algorithm, c, common.jobs, market);
            std::vector<double> sorted = a.null_sharpes;
            std::sort(sorted.begin(), sorted.end());
            ablation = {{"observed_sharpe", a.observed_sharpe},
                        {"n_mc", n_mc},
                        {"p_value", a.p_value},
                        {"null_q95", empirical_quantile(sorted, 0.95)},
                        {"null_sharpes", a.null_sharpes}};
            io::write_json((out / "ablation.json").string(), ablation);
        } else {
            rep = run_backtest(returns, spec, algorithm, c, common.jobs, market);
        }

        json j;
        j["metric"] = spec.label();
        j["algorithm"] = to_string(algorithm);
        j["refits"] = rep.refits;
        j["evaluated_days"] = rep.daily_returns.size();
        j["sharpe_annualized"] = rep.sharpe_annualized;
        j["sharpe_p_value_one_sided"] = rep.sharpe_p_value_one_sided;
        j["mean_daily_return_bp"] = rep.mean_daily_return_bp;
        j["market_correlation"] = rep.market_correlation ? json(*rep.market_correlation) : json(nullptr);
        j["cumulative_return"] = rep.cumulative_return.empty() ? 0.0 : rep.cumulative_return.back();
        if (ablate) j["ablation_p_value"] = ablation["p_value"];
        io::write_json((out / "backtest.json").string(), j);

        std::ostringstream csv;
        csv << "timestamp,return,cumulative\n";
        for (std::size_t i = 0; i < rep.daily_returns.size(); ++i)
            csv << rep.timestamps[i] << ',' << leadlag::detail::format_double(rep.daily_returns[i]) << ','
                << leadlag::detail::format_double(rep.cumulative_return[i]) << '\n';
        io::write_text((out / "daily_returns.csv").string(), csv.str());

        plot::Chart chart{"Cumulative return (" + spec.label() + ", " + to_string(algorithm) + ")", "evaluated day",
                          "cumulative return", {}};
        plot::Series s{"strategy", {}, rep.cumulative_return, {}};
        for (std::size_t i = 0; i < rep.cumulative_return.size(); ++i) s.x.push_back(static_cast<double>(i));
        chart.series.push_back(std::move(s));
        io::write_text((out / "cumulative_return.svg").string(), plot::render_svg(chart));

        std::cout << "Sharpe (annualized): " << rep.sharpe_annualized << '\n'
                  << "one-sided p-value: " << rep.sharpe_p_value_one_sided << '\n'
                  << "mean daily return: " << rep.mean_daily_return_bp << " bp\n";
        if (rep.market_correlation) std::cout << "market correlation: " << *rep.market_correlation << '\n';
        if (ablate) std::cout << "permuted-cluster ablation p-value: " << ablation["p_value"].get<double>() << '\n';
    }
};

// --- eval -------------------------------------------------------------------

struct EvalCmd {
    Common common;
    std::string truth, matrix, clustering, compare;

    void run(const CLI::App* sub) const {
        if (clustering.empty() && matrix.empty()) throw UsageError("eval needs --clustering and/or --matrix");
        if (!compare.empty() && clustering.empty()) throw UsageError("--compare needs --clustering");
        if (compare.empty() && truth.empty()) throw UsageError("eval needs --truth or --compare");
        const auto out = prepare_out(common);
        write_snapshot(out, sub);
        json j;
        std::optional<GroundTruth> gt;
        std::vector<std::string> truth_ids;
        if (!truth.empty()) {
            const auto tj = io::read_json(truth);
            gt = io::read_ground_truth(tj);
            io::read_clustering(tj, &truth_ids);
        }
        if (!matrix.empty() && gt) {
            const auto S = io::read_matrix_csv(matrix);
            if (S.series_ids != truth_ids) throw DataError("matrix series do not match the ground truth: " + matrix);
            j["edge_accuracy"] = edge_accuracy(S.scores, gt->edge_direction);
        }
        if (!clustering.empty()) {
            std::vector<std::string> ids;
            const auto c = io::read_clustering(io::read_json(clustering), &ids);
            if (gt) {
                if (ids != truth_ids) throw DataError("clustering series do not match the ground truth: " + clustering);
                j["ari"] = adjusted_rand_index(c, gt->clustering);
            }
            if (!compare.empty()) {
                std::vector<std::string> ids2;
                const auto c2 = io::read_clustering(io::read_json(compare), &ids2);
                if (ids2 != ids) throw DataError("clusterings cover different series: " + compare);
                j["ari_between"] = adjusted_rand_index(c, c2);
                const auto J = jaccard_matrix(c, c2);
                json rows = json::array();
                for (Eigen::Index r = 0; r < J.rows(); ++r) {
                    json row = json::array();
                    for (Eigen::Index col = 0; col < J.cols(); ++col) row.push_back(J(r, col));
                    rows.push_back(row);
                }
                j["jaccard"] = rows;
            }
        }
        io::write_json((out / "eval.json").string(), j);
        std::cout << j.dump() << '\n';
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lead-lag detection, directed spectral clustering and backtesting"};
    app.set_config("--config", "", "Read options from an INI file (e.g. a resolved-config snapshot)");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1, 1);

    MetricsCmd metrics;
    auto* s_metrics = app.add_subcommand("metrics", "Pairwise lead-lag matrix of a panel");
    add_common(s_metrics, metrics.common);
    add_panel(s_metrics, metrics.panel);
    add_metric(s_metrics, metrics.metric);

    ClusterCmd cluster;
    auto* s_cluster = app.add_subcommand("cluster", "Cluster a lead-lag matrix and report meta-flow and leadingness");
    add_common(s_cluster, cluster.common);
    s_cluster->add_option("--matrix", cluster.matrix, "Lead-lag matrix CSV")->required();
    s_cluster->add_option("--algo", cluster.algo, "naive | bibliometric | disim | disim-left | disim-right | hermitian-rw")
        ->capture_default_str();
    s_cluster->add_option("--side", cluster.side, "left | right (for --algo disim)")->capture_default_str();
    s_cluster->add_option("--k", cluster.k, "Number of clusters")->capture_default_str();
    s_cluster->add_option("--n-eig", cluster.n_eig, "Embedding dimension (0: k)")->capture_default_str();
    s_cluster->add_option("--restarts", cluster.restarts, "k-means restarts")->capture_default_str();

    SynthCmd synth;
    auto* s_synth = app.add_subcommand("synth", "Generate a synthetic panel with its ground truth");
    add_common(s_synth, synth.common);
    s_synth->add_option("--setting", synth.setting, "linear | cosine | legendre | hermite | heterogeneous")->capture_default_str();
    s_synth->add_option("--sigma", synth.sigma, "Noise level")->capture_default_str();
    s_synth->add_option("--T", synth.T, "Rows (0: default)")->capture_default_str();
    s_synth->add_option("--p", synth.p, "Series (0: default)")->capture_default_str();

    BenchCmd bench;
    auto* s_bench = app.add_subcommand("synth-bench", "Synthetic recovery benchmark");
    add_common(s_bench, bench.common);
    s_bench->add_option("--settings", bench.settings, "Comma list or 'all'")->capture_default_str();
    s_bench->add_option("--sigmas", bench.sigmas, "Comma list of noise levels")->capture_default_str();
    s_bench->add_option("--metrics", bench.metrics, "Comma list like ccf-auc/dcor,signature or 'all'")->capture_default_str();
    s_bench->add_option("--algos", bench.algos, "Comma list of algorithms or 'all'")->capture_default_str();
    s_bench->add_option("--reps", bench.reps, "Repetitions per cell")->capture_default_str();
    s_bench->add_flag("--k-sweep", bench.k_sweep, "Vary the cluster count over --k-values");
    s_bench->add_option("--k-values", bench.k_values, "Cluster counts for --k-sweep")->capture_default_str();
    s_bench->add_option("--T", bench.T, "Rows per panel (0: default)")->capture_default_str();
    s_bench->add_option("--p", bench.p, "Series per panel (0: default)")->capture_default_str();

    PermCmd perm;
    auto* s_perm = app.add_subcommand("permtest", "Permutation test on the largest Hermitian eigenvalue");
    add_common(s_perm, perm.common);
    add_panel(s_perm, perm.panel);
    add_metric(s_perm, perm.metric);
    s_perm->add_option("--n-mc", perm.n_mc, "Monte Carlo replicates")->capture_default_str();

    BacktestCmd bt;
    auto* s_bt = app.add_subcommand("backtest", "Rolling cluster-to-cluster forecasting backtest");
    add_common(s_bt, bt.common);
    add_panel(s_bt, bt.panel);
    add_metric(s_bt, bt.metric);
    s_bt->add_option("--algo", bt.algo, "Clustering algorithm")->capture_default_str();
    s_bt->add_option("--side", bt.side, "left | right (for --algo disim)")->capture_default_str();
    s_bt->add_option("--k", bt.cfg.k, "Clusters per refit")->capture_default_str();
    s_bt->add_option("--lookback", bt.cfg.lookback, "Look-back window (days)")->capture_default_str();
    s_bt->add_option("--update-period", bt.cfg.update_period, "Days between refits")->capture_default_str();
    s_bt->add_option("--ewma-alpha", bt.cfg.ewma_alpha, "EWMA parameter")->capture_default_str();
    s_bt->add_option("--flow-quantile", bt.cfg.flow_quantile, "Meta-flow mask quantile")->capture_default_str();
    s_bt->add_option("--vol-window", bt.cfg.vol_window, "Volatility estimator window")->capture_default_str();
    s_bt->add_option("--vol-target", bt.cfg.vol_target_annual, "Annual volatility target")->capture_default_str();
    s_bt->add_option("--vol-floor", bt.cfg.vol_floor, "Daily volatility floor")->capture_default_str();
    s_bt->add_option("--annualization", bt.cfg.annualization, "Trading days per year")->capture_default_str();
    s_bt->add_option("--benchmark", bt.benchmark, "Column holding market returns (excluded from trading)")->capture_default_str();
    s_bt->add_flag("--ablate-permuted-clusters", bt.ablate, "Compare against randomly permuted cluster labels");
    s_bt->add_option("--n-mc", bt.n_mc, "Ablation replicates")->capture_default_str();

    EvalCmd ev;
    auto* s_eval = app.add_subcommand("eval", "Score a matrix or clustering against ground truth or another clustering");
    add_common(s_eval, ev.common);
    s_eval->add_option("--truth", ev.truth, "Ground-truth JSON from `synth`")->capture_default_str();
    s_eval->add_option("--matrix", ev.matrix, "Lead-lag matrix CSV")->capture_default_str();
    s_eval->add_option("--clustering", ev.clustering, "Clustering JSON")->capture_default_str();
    s_eval->add_option("--compare", ev.compare, "Second clustering JSON")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (s_metrics->parsed()) metrics.run(s_metrics);
        else if (s_cluster->parsed()) cluster.run(s_cluster);
        else if (s_synth->parsed()) synth.run(s_synth);
        else if (s_bench->parsed()) bench.run(s_bench);
        else if (s_perm->parsed()) perm.run(s_perm);
        else if (s_bt->parsed()) bt.run(s_bt);
        else if (s_eval->parsed()) ev.run(s_eval);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
