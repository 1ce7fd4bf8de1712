#include "pottsrf/cli.hpp"

#include <glob.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pottsrf/clustering.hpp"
#include "pottsrf/errors.hpp"
#include "pottsrf/imaging.hpp"
#include "pottsrf/io.hpp"
#include "pottsrf/parallel.hpp"
#include "pottsrf/region_force.hpp"
#include "pottsrf/solver.hpp"

namespace pottsrf::cli {

namespace {

using nlohmann::json;

/// Every tunable reachable through config files and --set overrides. Values
/// not explicitly set fall back to pipeline-dependent defaults (see
/// finalize_solver_defaults).
struct RunConfig {
    std::string algorithm = "pdhg";
    double beta = 0.4;
    double gamma = 0.4;
    double theta = -0.5;
    double c = 0.05;
    double epsilon = 1e-3;
    int max_iter = 2500;
    std::string schedule = "fixed";
    double schedule_eta = 0.1;
    bool literal_updates = false;
    bool uniform_init = false;
    int energy_every = 1;

    int s = 10;
    int m = 2;
    std::string weight_kind = "zmp";
    double rbf_epsilon = 1.0;

    std::string force = "log";
    double delta = 1e-3;
    double alpha = 0.0;

    double sigma = 1.0;
    bool squared_distance = false;
    double edge_beta = 1.0;
    double edge_gamma = 0.0;
    double blur_sigma = 0.0;
    double intensity_scale = 1.0;

    int k = 0;
    int n_seeds = 50;
    int n_trials = 10;
    std::uint64_t seed = 0;
    int threads = 0;
    bool stratified = false;

    std::set<std::string> set_keys;
    bool is_set(const std::string& key) const { return set_keys.count(key) > 0; }
};

double parse_double_value(const std::string& v, const std::string& where) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing junk");
        return d;
    } catch (const std::exception&) {
        throw std::invalid_argument(where + ": expected a number, got '" + v + "'");
    }
}

long parse_int_value(const std::string& v, const std::string& where) {
    try {
        std::size_t used = 0;
        const long d = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing junk");
        return d;
    } catch (const std::exception&) {
        throw std::invalid_argument(where + ": expected an integer, got '" + v + "'");
    }
}

bool parse_bool_value(const std::string& v, const std::string& where) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument(where + ": expected a boolean, got '" + v + "'");
}

void apply_kv(RunConfig& cfg, const std::string& key, const std::string& value,
              const std::string& where) {
    using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;
    static const std::map<std::string, Setter> table = {
        {"algorithm",
         [](RunConfig& c, const std::string& v, const std::string& w) {
             if (v != "pdhg" && v != "admm")
                 throw std::invalid_argument(w + ": algorithm must be pdhg or admm");
             c.algorithm = v;
         }},
        {"beta", [](RunConfig& c, const std::string& v, const std::string& w) { c.beta = parse_double_value(v, w); }},
        {"gamma", [](RunConfig& c, const std::string& v, const std::string& w) { c.gamma = parse_double_value(v, w); }},
        {"theta", [](RunConfig& c, const std::string& v, const std::string& w) { c.theta = parse_double_value(v, w); }},
        {"c", [](RunConfig& c, const std::string& v, const std::string& w) { c.c = parse_double_value(v, w); }},
        {"epsilon", [](RunConfig& c, const std::string& v, const std::string& w) { c.epsilon = parse_double_value(v, w); }},
        {"max_iter", [](RunConfig& c, const std::string& v, const std::string& w) { c.max_iter = static_cast<int>(parse_int_value(v, w)); }},
        {"schedule",
         [](RunConfig& c, const std::string& v, const std::string& w) {
             if (v != "fixed" && v != "ramp")
                 throw std::invalid_argument(w + ": schedule must be fixed or ramp");
             c.schedule = v;
         }},
        {"schedule_eta", [](RunConfig& c, const std::string& v, const std::string& w) { c.schedule_eta = parse_double_value(v, w); }},
        {"literal_updates", [](RunConfig& c, const std::string& v, const std::string& w) { c.literal_updates = parse_bool_value(v, w); }},
        {"uniform_init", [](RunConfig& c, const std::string& v, const std::string& w) { c.uniform_init = parse_bool_value(v, w); }},
        {"energy_every", [](RunConfig& c, const std::string& v, const std::string& w) { c.energy_every = static_cast<int>(parse_int_value(v, w)); }},
        {"s", [](RunConfig& c, const std::string& v, const std::string& w) { c.s = static_cast<int>(parse_int_value(v, w)); }},
        {"m", [](RunConfig& c, const std::string& v, const std::string& w) { c.m = static_cast<int>(parse_int_value(v, w)); }},
        {"weight_kind",
         [](RunConfig& c, const std::string& v, const std::string& w) {
             if (v != "rbf" && v != "zmp" && v != "cosine")
                 throw std::invalid_argument(w + ": weight_kind must be rbf, zmp or cosine");
             c.weight_kind = v;
         }},
        {"rbf_epsilon", [](RunConfig& c, const std::string& v, const std::string& w) { c.rbf_epsilon = parse_double_value(v, w); }},
        {"force",
         [](RunConfig& c, const std::string& v, const std::string& w) {
             if (v != "log" && v != "linear" && v != "l2")
                 throw std::invalid_argument(w + ": force must be log, linear or l2");
             c.force = v;
         }},
        {"delta", [](RunConfig& c, const std::string& v, const std::string& w) { c.delta = parse_double_value(v, w); }},
        {"alpha", [](RunConfig& c, const std::string& v, const std::string& w) { c.alpha = parse_double_value(v, w); }},
        {"sigma", [](RunConfig& c, const std::string& v, const std::string& w) { c.sigma = parse_double_value(v, w); }},
        {"squared_distance", [](RunConfig& c, const std::string& v, const std::string& w) { c.squared_distance = parse_bool_value(v, w); }},
        {"edge_beta", [](RunConfig& c, const std::string& v, const std::string& w) { c.edge_beta = parse_double_value(v, w); }},
        {"edge_gamma", [](RunConfig& c, const std::string& v, const std::string& w) { c.edge_gamma = parse_double_value(v, w); }},
        {"blur_sigma", [](RunConfig& c, const std::string& v, const std::string& w) { c.blur_sigma = parse_double_value(v, w); }},
        {"intensity_scale", [](RunConfig& c, const std::string& v, const std::string& w) { c.intensity_scale = parse_double_value(v, w); }},
        {"k", [](RunConfig& c, const std::string& v, const std::string& w) { c.k = static_cast<int>(parse_int_value(v, w)); }},
        {"n_seeds", [](RunConfig& c, const std::string& v, const std::string& w) { c.n_seeds = static_cast<int>(parse_int_value(v, w)); }},
        {"n_trials", [](RunConfig& c, const std::string& v, const std::string& w) { c.n_trials = static_cast<int>(parse_int_value(v, w)); }},
        {"seed", [](RunConfig& c, const std::string& v, const std::string& w) { c.seed = static_cast<std::uint64_t>(parse_int_value(v, w)); }},
        {"threads", [](RunConfig& c, const std::string& v, const std::string& w) { c.threads = static_cast<int>(parse_int_value(v, w)); }},
        {"stratified", [](RunConfig& c, const std::string& v, const std::string& w) { c.stratified = parse_bool_value(v, w); }},
    };
    const auto it = table.find(key);
    if (it == table.end())
        throw std::invalid_argument(where + ": unknown config key '" + key + "'");
    it->second(cfg, value, where);
    cfg.set_keys.insert(key);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

void load_config_file(RunConfig& cfg, const std::string& path) {
    const std::string content = read_file(path);
    std::size_t pos = 0;
    int line_no = 0;
    while (pos < content.size()) {
        std::size_t nl = content.find('\n', pos);
        if (nl == std::string::npos) nl = content.size();
        std::string line = content.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = path + ":" + std::to_string(line_no);
        if (eq == std::string::npos)
            throw std::invalid_argument(where + ": expected key=value");
        apply_kv(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where);
    }
}

void apply_set_overrides(RunConfig& cfg, const std::vector<std::string>& sets) {
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set: expected key=value, got '" + kv + "'");
        apply_kv(cfg, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)), "--set " + kv);
    }
}

// The tabulated defaults differ between the two pipelines (and between the
// two algorithms for beta), so unset keys are resolved here.
void finalize_solver_defaults(RunConfig& cfg, bool image_pipeline) {
    if (!cfg.is_set("beta") && cfg.algorithm == "admm") cfg.beta = 0.05;
    if (!cfg.is_set("c")) cfg.c = image_pipeline ? 0.1 : 0.05;
    if (!cfg.is_set("epsilon")) cfg.epsilon = image_pipeline ? 1e-5 : 1e-3;
}

SolverConfig make_solver_config(const RunConfig& cfg) {
    SolverConfig s;
    s.algorithm = cfg.algorithm == "admm" ? Algorithm::admm : Algorithm::pdhg;
    s.beta = cfg.beta;
    s.gamma = cfg.gamma;
    s.theta = cfg.theta;
    s.penalty = cfg.c;
    s.epsilon = cfg.epsilon;
    s.max_iter = cfg.max_iter;
    s.schedule = cfg.schedule == "ramp" ? StepSchedule::ramp : StepSchedule::fixed;
    s.schedule_eta = cfg.schedule_eta;
    s.literal_updates = cfg.literal_updates;
    s.uniform_init = cfg.uniform_init;
    s.energy_every = cfg.energy_every;
    return s;
}

RegionForceKind make_force(const std::string& name) {
    if (name == "log") return RegionForceKind::log;
    if (name == "linear") return RegionForceKind::linear;
    return RegionForceKind::l2;
}

WeightKind make_weight(const std::string& name) {
    if (name == "rbf") return WeightKind::rbf;
    if (name == "cosine") return WeightKind::cosine;
    return WeightKind::zmp;
}

json report_json(const std::string& algorithm, const SolverReport& r, bool omit_timing) {
    json j;
    j["algorithm"] = algorithm;
    j["iterations"] = r.iterations;
    j["final_gap"] = r.final_gap;
    j["primal_energy"] = r.primal_energy;
    j["dual_energy"] = r.dual_energy;
    j["termination"] = to_string(r.termination);
    if (!omit_timing) j["wall_time_s"] = r.wall_time_s;
    return j;
}

void write_energy_csv(const SolverReport& r, int energy_every, const std::string& path) {
    std::string content = "iter,E_P,E_D\n";
    for (std::size_t t = 0; t < r.primal_history.size(); ++t) {
        long iter = static_cast<long>(t + 1) * energy_every;
        if (t + 1 == r.primal_history.size()) iter = r.iterations;
        content += std::to_string(iter);
        content += ',';
        content += format_double(r.primal_history[t]);
        content += ',';
        content += format_double(r.dual_history[t]);
        content += '\n';
    }
    write_file_atomic(path, content);
}

std::string stem_of(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

struct GenOpts {
    std::string dataset;
    std::string out;
    std::uint64_t seed = 0;
    int n = 6000;
    int dim = 100;
    double noise = 0.4;
    bool arc_length = false;
};

int cmd_gen(const GenOpts& o, std::ostream& out) {
    if (o.dataset != "three-circles")
        throw std::invalid_argument("unknown dataset '" + o.dataset +
                                    "' (available: three-circles)");
    const Dataset ds = gen_three_circles(o.seed, o.n, o.dim, o.noise, o.arc_length);
    const std::string points_path = o.out + "_points.csv";
    const std::string labels_path = o.out + "_labels.csv";
    write_csv_matrix(ds.points, points_path);
    write_labels(ds.labels, labels_path);
    json j;
    j["command"] = "gen";
    j["dataset"] = o.dataset;
    j["n"] = ds.n();
    j["dim"] = ds.points.cols;
    j["seed"] = o.seed;
    j["points_path"] = points_path;
    j["labels_path"] = labels_path;
    out << j.dump() << "\n";
    return 0;
}

struct ClusterOpts {
    std::string data, labels, config, out;
    std::vector<std::string> sets;
    bool omit_timing = false;
    bool energies = false;
};

int cmd_cluster(const ClusterOpts& o, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    if (!o.config.empty()) load_config_file(cfg, o.config);
    apply_set_overrides(cfg, o.sets);
    if (!cfg.is_set("alpha"))
        throw std::invalid_argument("missing required config key 'alpha'");
    if (cfg.force == "l2")
        throw std::invalid_argument("clustering supports the log and linear forces");
    finalize_solver_defaults(cfg, false);

    const Dataset ds = load_dataset(o.data, o.labels);
    if (cfg.is_set("k") && cfg.k != ds.n_classes)
        throw std::invalid_argument("config k=" + std::to_string(cfg.k) + " but labels imply " +
                                    std::to_string(ds.n_classes) + " classes");

    ClusterParams params;
    params.n_classes = ds.n_classes;
    params.knn.s = cfg.s;
    params.knn.kind = make_weight(cfg.weight_kind);
    params.knn.rbf_epsilon = cfg.rbf_epsilon;
    params.knn.threads = resolve_threads(cfg.threads);
    params.diffusion_power = cfg.m;
    params.force = make_force(cfg.force);
    params.delta = cfg.delta;
    params.alpha = cfg.alpha;
    params.solver = make_solver_config(cfg);

    err << "clustering " << ds.n() << " points, " << ds.n_classes << " classes, "
        << cfg.n_trials << " trials\n";
    const TrialAggregate agg =
        run_trials(ds, params, cfg.n_trials, cfg.n_seeds, cfg.seed, cfg.stratified);

    const std::string run_id = stem_of(o.out);
    for (std::size_t t = 0; t < agg.trials.size(); ++t) {
        const TrialResult& tr = agg.trials[t];
        json j = report_json(cfg.algorithm, tr.report, o.omit_timing);
        j["run_id"] = run_id + "_trial_" + std::to_string(t);
        j["force"] = cfg.force;
        j["accuracy"] = tr.accuracy;
        j["accuracy_unlabeled"] = tr.accuracy_unlabeled;
        j["accuracy_unclamped"] = tr.accuracy_unclamped;
        j["n_seeds"] = tr.seeds.total();
        write_file_atomic(o.out + "_trial_" + std::to_string(t) + ".json", j.dump(2) + "\n");
        if (o.energies) {
            write_energy_csv(tr.report, params.solver.energy_every,
                             o.out + "_trial_" + std::to_string(t) + "_energies.csv");
        }
    }

    json j;
    j["run_id"] = run_id;
    j["command"] = "cluster";
    j["algorithm"] = cfg.algorithm;
    j["force"] = cfg.force;
    j["n_trials"] = cfg.n_trials;
    j["n_seeds"] = cfg.n_seeds;
    j["mean_accuracy"] = agg.mean_accuracy;
    j["stddev_accuracy"] = agg.stddev_accuracy;
    j["min_accuracy"] = agg.min_accuracy;
    j["max_accuracy"] = agg.max_accuracy;
    j["mean_iterations"] = agg.mean_iterations;
    if (!o.omit_timing) j["mean_wall_time_s"] = agg.mean_wall_time_s;
    write_file_atomic(o.out + ".json", j.dump(2) + "\n");
    out << j.dump() << "\n";
    return 0;
}

struct SegmentOpts {
    std::string image, config, out_labels, out_report, out_energies, out_phi;
    std::vector<std::string> sets;
    bool omit_timing = false;
};

int cmd_segment(const SegmentOpts& o, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    if (!o.config.empty()) load_config_file(cfg, o.config);
    apply_set_overrides(cfg, o.sets);
    if (cfg.k < 2) throw std::invalid_argument("segmentation needs k >= 2 classes");
    finalize_solver_defaults(cfg, true);

    const Image img = load_image(o.image);
    err << "segmenting " << img.width << "x" << img.height << " image into " << cfg.k
        << " classes\n";

    SegmentParams params;
    params.n_classes = cfg.k;
    params.force = make_force(cfg.force);
    params.delta = cfg.delta;
    params.sigma = cfg.sigma;
    params.squared_distance = cfg.squared_distance;
    params.alpha = cfg.edge_beta;
    params.edge_gamma = cfg.edge_gamma;
    params.blur_sigma = cfg.blur_sigma;
    params.intensity_scale = cfg.intensity_scale;
    params.seed = cfg.seed;
    params.solver = make_solver_config(cfg);

    const SegmentResult res = segment_image(img, params);
    save_label_map(res.labels, img.width, img.height, o.out_labels);

    json j = report_json(cfg.algorithm, res.report, o.omit_timing);
    j["run_id"] = stem_of(o.out_labels);
    j["command"] = "segment";
    j["force"] = cfg.force;
    j["k"] = cfg.k;
    j["labels_path"] = o.out_labels;
    if (!o.out_report.empty()) write_file_atomic(o.out_report, j.dump(2) + "\n");
    if (!o.out_energies.empty())
        write_energy_csv(res.report, params.solver.energy_every, o.out_energies);
    if (!o.out_phi.empty()) {
        for (int c = 0; c < cfg.k; ++c) {
            Image field(img.width, img.height, 1);
            for (int p = 0; p < img.n_pixels(); ++p) field.data[p] = res.phi(p, c);
            save_pgm(field, o.out_phi + "_class" + std::to_string(c) + ".pgm");
        }
    }
    out << j.dump() << "\n";
    return 0;
}

struct ReportOpts {
    std::vector<std::string> inputs;
    std::string out;
};

std::vector<std::string> expand_globs(const std::vector<std::string>& patterns) {
    std::vector<std::string> paths;
    for (const auto& p : patterns) {
        ::glob_t g{};
        const int rc = ::glob(p.c_str(), 0, nullptr, &g);
        if (rc == 0) {
            for (std::size_t i = 0; i < g.gl_pathc; ++i) paths.emplace_back(g.gl_pathv[i]);
        } else {
            paths.push_back(p);  // let the read fail with a per-file warning
        }
        ::globfree(&g);
    }
    return paths;
}

int cmd_report(const ReportOpts& o, std::ostream& out, std::ostream& err) {
    const auto paths = expand_globs(o.inputs);
    std::string csv = "run_id,algorithm,force,accuracy,iterations,gap,wall_time_s\n";
    int rows = 0;
    auto cell = [](const json& j, std::initializer_list<const char*> keys) -> std::string {
        for (const char* k : keys) {
            if (!j.contains(k)) continue;
            if (j[k].is_number_integer()) return std::to_string(j[k].get<long long>());
            if (j[k].is_number()) {
                const double v = j[k].get<double>();
                if (std::abs(v) < 1e15 && std::floor(v) == v)
                    return std::to_string(static_cast<long long>(v));
                return format_double(v);
            }
            if (j[k].is_string()) return j[k].get<std::string>();
        }
        return "";
    };
    for (const auto& path : paths) {
        json j;
        try {
            j = json::parse(read_file(path));
            if (!j.is_object()) throw parse_error("not a JSON object");
        } catch (const std::exception& e) {
            err << "warning: skipping " << path << ": " << e.what() << "\n";
            continue;
        }
        const std::string run_id =
            j.contains("run_id") && j["run_id"].is_string() ? j["run_id"].get<std::string>()
                                                            : stem_of(path);
        csv += run_id;
        csv += ',';
        csv += cell(j, {"algorithm"});
        csv += ',';
        csv += cell(j, {"force"});
        csv += ',';
        csv += cell(j, {"accuracy", "mean_accuracy"});
        csv += ',';
        csv += cell(j, {"iterations", "mean_iterations"});
        csv += ',';
        csv += cell(j, {"final_gap"});
        csv += ',';
        csv += cell(j, {"wall_time_s", "mean_wall_time_s"});
        csv += '\n';
        ++rows;
    }
    if (rows == 0) {
        err << "error: no readable input reports\n";
        return 2;
    }
    write_file_atomic(o.out, csv);
    json j;
    j["command"] = "report";
    j["rows"] = rows;
    j["out"] = o.out;
    out << j.dump() << "\n";
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"relaxed Potts segmentation and semi-supervised clustering"};
    app.require_subcommand(1);

    GenOpts gen_o;
    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
    gen->add_option("dataset", gen_o.dataset, "dataset name (three-circles)")->required();
    gen->add_option("--out", gen_o.out, "output prefix (<out>_points.csv, <out>_labels.csv)")
        ->required();
    gen->add_option("--seed", gen_o.seed, "generator seed");
    gen->add_option("--n", gen_o.n, "number of points");
    gen->add_option("--dim", gen_o.dim, "embedding dimension");
    gen->add_option("--noise", gen_o.noise, "noise standard deviation");
    gen->add_flag("--arc-length", gen_o.arc_length, "sample circles by circumference");

    ClusterOpts cl_o;
    std::string cl_solver, cl_force, cl_alpha, cl_trials, cl_seeds, cl_seed, cl_threads;
    auto* cl = app.add_subcommand("cluster", "run semi-supervised clustering trials");
    cl->add_option("--data", cl_o.data, "points CSV")->required();
    cl->add_option("--labels", cl_o.labels, "ground-truth labels file")->required();
    cl->add_option("--config", cl_o.config, "key=value config file");
    cl->add_option("--out", cl_o.out, "output prefix (<out>.json, <out>_trial_N.json)")
        ->required();
    auto* cl_solver_opt = cl->add_option("--solver", cl_solver, "pdhg or admm");
    auto* cl_force_opt = cl->add_option("--force", cl_force, "log or linear");
    auto* cl_alpha_opt = cl->add_option("--alpha", cl_alpha, "total-variation weight");
    auto* cl_trials_opt = cl->add_option("--trials", cl_trials, "number of trials");
    auto* cl_seeds_opt = cl->add_option("--seeds", cl_seeds, "labeled points per trial");
    auto* cl_seed_opt = cl->add_option("--seed", cl_seed, "base RNG seed");
    auto* cl_threads_opt = cl->add_option("--threads", cl_threads, "worker threads (0 = auto)");
    cl->add_option("--set", cl_o.sets, "override any config key (key=value)");
    cl->add_flag("--omit-timing", cl_o.omit_timing, "drop wall times from outputs");
    cl->add_flag("--out-energies", cl_o.energies, "write per-trial energy histories");

    SegmentOpts sg_o;
    std::string sg_k, sg_force, sg_solver, sg_seed, sg_threads;
    auto* sg = app.add_subcommand("segment", "segment an image");
    sg->add_option("--image", sg_o.image, "input PNG/PPM/PGM")->required();
    auto* sg_k_opt = sg->add_option("--k", sg_k, "number of classes");
    auto* sg_force_opt = sg->add_option("--force", sg_force, "log, linear or l2");
    auto* sg_solver_opt = sg->add_option("--solver", sg_solver, "pdhg or admm");
    auto* sg_seed_opt = sg->add_option("--seed", sg_seed, "centroid RNG seed");
    auto* sg_threads_opt = sg->add_option("--threads", sg_threads, "worker threads (0 = auto)");
    sg->add_option("--config", sg_o.config, "key=value config file");
    sg->add_option("--out-labels", sg_o.out_labels, "label map PNG")->required();
    sg->add_option("--out-report", sg_o.out_report, "solver report JSON");
    sg->add_option("--out-energies", sg_o.out_energies, "energy history CSV");
    sg->add_option("--out-phi", sg_o.out_phi, "per-class membership PGM prefix");
    sg->add_option("--set", sg_o.sets, "override any config key (key=value)");
    sg->add_flag("--omit-timing", sg_o.omit_timing, "drop wall times from outputs");

    ReportOpts rp_o;
    auto* rp = app.add_subcommand("report", "aggregate run JSONs into a CSV table");
    rp->add_option("--inputs", rp_o.inputs, "report JSON paths or globs")->required();
    rp->add_option("--out", rp_o.out, "output CSV")->required();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? 0 : 1;  // collapse CLI11's error codes onto "usage"
    }

    try {
        if (gen->parsed()) return cmd_gen(gen_o, out);
        if (cl->parsed()) {
            if (cl_solver_opt->count()) cl_o.sets.push_back("algorithm=" + cl_solver);
            if (cl_force_opt->count()) cl_o.sets.push_back("force=" + cl_force);
            if (cl_alpha_opt->count()) cl_o.sets.push_back("alpha=" + cl_alpha);
            if (cl_trials_opt->count()) cl_o.sets.push_back("n_trials=" + cl_trials);
            if (cl_seeds_opt->count()) cl_o.sets.push_back("n_seeds=" + cl_seeds);
            if (cl_seed_opt->count()) cl_o.sets.push_back("seed=" + cl_seed);
            if (cl_threads_opt->count()) cl_o.sets.push_back("threads=" + cl_threads);
            return cmd_cluster(cl_o, out, err);
        }
        if (sg->parsed()) {
            if (sg_k_opt->count()) sg_o.sets.push_back("k=" + sg_k);
            if (sg_force_opt->count()) sg_o.sets.push_back("force=" + sg_force);
            if (sg_solver_opt->count()) sg_o.sets.push_back("algorithm=" + sg_solver);
            if (sg_seed_opt->count()) sg_o.sets.push_back("seed=" + sg_seed);
            if (sg_threads_opt->count()) sg_o.sets.push_back("threads=" + sg_threads);
            return cmd_segment(sg_o, out, err);
        }
        if (rp->parsed()) return cmd_report(rp_o, out, err);
    } catch (const io_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const parse_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const numeric_error& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}

}  // namespace pottsrf::cli
