#include "qtsp/bench.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "qtsp/rng.hpp"

namespace qtsp {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

const char* gradient_method_name(GradientMethod m) {
    return m == GradientMethod::Adjoint ? "adjoint" : "param-shift";
}
GradientMethod gradient_method_from(const std::string& s) {
    if (s == "adjoint") return GradientMethod::Adjoint;
    if (s == "param-shift") return GradientMethod::ParamShift;
    throw std::invalid_argument("unknown gradient method: " + s);
}

const char* engine_name(EngineKind e) {
    switch (e) {
        case EngineKind::Auto: return "auto";
        case EngineKind::Dense: return "dense";
        case EngineKind::Subspace: return "subspace";
    }
    return "auto";
}
EngineKind engine_from(const std::string& s) {
    if (s == "auto") return EngineKind::Auto;
    if (s == "dense") return EngineKind::Dense;
    if (s == "subspace") return EngineKind::Subspace;
    throw std::invalid_argument("unknown engine: " + s);
}

const char* order_name(BlockOrder o) {
    return o == BlockOrder::RotationFirst ? "rotation-first" : "swap-first";
}
BlockOrder order_from(const std::string& s) {
    if (s == "rotation-first") return BlockOrder::RotationFirst;
    if (s == "swap-first") return BlockOrder::SwapFirst;
    throw std::invalid_argument("unknown block order: " + s);
}

json optimizer_to_json(const OptimizerConfig& o) {
    return json{{"iterations", o.iterations},
                {"learning_rate", o.learning_rate},
                {"beta1", o.beta1},
                {"beta2", o.beta2},
                {"epsilon", o.epsilon},
                {"init_range", o.init_range},
                {"gradient_method", gradient_method_name(o.gradient_method)},
                {"engine", engine_name(o.engine)},
                {"block_order", order_name(o.block_order)}};
}

OptimizerConfig optimizer_from_json(const json& j) {
    OptimizerConfig o;
    o.iterations = j.value("iterations", o.iterations);
    o.learning_rate = j.value("learning_rate", o.learning_rate);
    o.beta1 = j.value("beta1", o.beta1);
    o.beta2 = j.value("beta2", o.beta2);
    o.epsilon = j.value("epsilon", o.epsilon);
    o.init_range = j.value("init_range", o.init_range);
    o.gradient_method = gradient_method_from(j.value("gradient_method", std::string("adjoint")));
    o.engine = engine_from(j.value("engine", std::string("auto")));
    o.block_order = order_from(j.value("block_order", std::string("rotation-first")));
    return o;
}

json dnc_run_to_json(const DncConfig& d) {
    return json{{"iterations", d.iterations},
                {"shots", d.shots},
                {"spsa_a", d.spsa.a},
                {"spsa_c", d.spsa.c},
                {"spsa_stability", d.spsa.stability},
                {"spsa_alpha", d.spsa.alpha},
                {"spsa_gamma", d.spsa.gamma},
                {"spsa_auto_gain", d.spsa.auto_gain},
                {"spsa_target_first_step", d.spsa.target_first_step},
                {"spsa_probe_evals", d.spsa.probe_evals},
                {"noise_p01", d.noise_p01},
                {"noise_p10", d.noise_p10},
                {"calibration_shots", d.calibration_shots},
                {"exact_calibration", d.exact_calibration},
                {"ibu_iterations", d.ibu.iterations},
                {"ibu_stop_tol", d.ibu.stop_tol},
                {"init_range", d.init_range},
                {"init", d.init == DncInit::WarmStart
                             ? "warm-start"
                             : (d.init == DncInit::Random ? "random" : "uniform")},
                {"warm_start_noise", d.warm_start_noise},
                {"penalty_ramp_fraction", d.penalty_ramp_fraction}};
}

DncConfig dnc_run_from_json(const json& j) {
    DncConfig d;
    d.iterations = j.value("iterations", d.iterations);
    d.shots = j.value("shots", d.shots);
    d.spsa.a = j.value("spsa_a", d.spsa.a);
    d.spsa.c = j.value("spsa_c", d.spsa.c);
    d.spsa.stability = j.value("spsa_stability", d.spsa.stability);
    d.spsa.alpha = j.value("spsa_alpha", d.spsa.alpha);
    d.spsa.gamma = j.value("spsa_gamma", d.spsa.gamma);
    d.spsa.auto_gain = j.value("spsa_auto_gain", d.spsa.auto_gain);
    d.spsa.target_first_step = j.value("spsa_target_first_step", d.spsa.target_first_step);
    d.spsa.probe_evals = j.value("spsa_probe_evals", d.spsa.probe_evals);
    d.noise_p01 = j.value("noise_p01", d.noise_p01);
    d.noise_p10 = j.value("noise_p10", d.noise_p10);
    d.calibration_shots = j.value("calibration_shots", d.calibration_shots);
    d.exact_calibration = j.value("exact_calibration", d.exact_calibration);
    d.ibu.iterations = j.value("ibu_iterations", d.ibu.iterations);
    d.ibu.stop_tol = j.value("ibu_stop_tol", d.ibu.stop_tol);
    d.init_range = j.value("init_range", d.init_range);
    d.penalty_ramp_fraction = j.value("penalty_ramp_fraction", d.penalty_ramp_fraction);
    {
        std::string init = j.value("init", std::string("warm-start"));
        if (init == "warm-start") d.init = DncInit::WarmStart;
        else if (init == "uniform") d.init = DncInit::UniformSuperposition;
        else if (init == "random") d.init = DncInit::Random;
        else throw std::invalid_argument("unknown dnc init: " + init);
    }
    d.warm_start_noise = j.value("warm_start_noise", d.warm_start_noise);
    return d;
}

json range_to_json(const WeightRange& r) { return json::array({r.lo, r.hi}); }
WeightRange range_from_json(const json& j, WeightRange def) {
    if (j.is_null()) return def;
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

} // namespace

std::string ExperimentConfig::to_json() const {
    json j;
    j["mode"] = mode;
    j["seed"] = seed;
    j["workers"] = workers;
    j["paper_scale"] = paper_scale;
    j["out"] = out_dir;

    j["gen"] = {{"ns", gen.ns},
                {"count", gen.count},
                {"weight_range", range_to_json(gen.weight_range)},
                {"integer_weights", gen.integer_weights}};
    j["solve"] = {{"input", solve.input}};
    j["vqe"] = {{"n", vqe.n},
                {"depth", vqe.depth},
                {"instance_seed", vqe.instance_seed},
                {"init_seed", vqe.init_seed},
                {"weight_range", range_to_json(vqe.weight_range)},
                {"integer_weights", vqe.integer_weights},
                {"optimizer", optimizer_to_json(vqe.opt)}};
    json depths = json::object();
    for (const auto& [n, ls] : sweep.depths) depths[std::to_string(n)] = ls;
    j["sweep"] = {{"ns", sweep.ns},
                  {"depths", depths},
                  {"instances", sweep.instances},
                  {"inits", sweep.inits},
                  {"weight_range", range_to_json(sweep.weight_range)},
                  {"integer_weights", sweep.integer_weights},
                  {"optimizer", optimizer_to_json(sweep.opt)}};
    j["dnc"] = {{"fixture", dnc.fixture},
                {"n", dnc.n},
                {"instance_seed", dnc.instance_seed},
                {"integer_weights", dnc.integer_weights},
                {"weight_range", range_to_json(dnc.weight_range)},
                {"lambda", dnc.lambda},
                {"mu", dnc.mu},
                {"run", dnc_run_to_json(dnc.run)},
                {"variants", dnc.variants}};
    j["mitigation"] = {{"trials", mitigation.trials},
                       {"qubits", mitigation.qubits},
                       {"shots", mitigation.shots},
                       {"perturbation", mitigation.perturbation},
                       {"noise_p01", mitigation.noise_p01},
                       {"noise_p10", mitigation.noise_p10},
                       {"ibu_iterations", mitigation.ibu.iterations},
                       {"ibu_stop_tol", mitigation.ibu.stop_tol}};
    j["report"] = {{"inputs", report.inputs}};
    return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    json j = json::parse(text);
    ExperimentConfig c;
    c.mode = j.value("mode", c.mode);
    c.seed = j.value("seed", c.seed);
    c.workers = j.value("workers", c.workers);
    c.paper_scale = j.value("paper_scale", c.paper_scale);
    c.out_dir = j.value("out", c.out_dir);

    if (j.contains("gen")) {
        const json& g = j["gen"];
        c.gen.ns = g.value("ns", c.gen.ns);
        c.gen.count = g.value("count", c.gen.count);
        c.gen.weight_range = range_from_json(g.value("weight_range", json()), c.gen.weight_range);
        c.gen.integer_weights = g.value("integer_weights", c.gen.integer_weights);
    }
    if (j.contains("solve")) c.solve.input = j["solve"].value("input", c.solve.input);
    if (j.contains("vqe")) {
        const json& v = j["vqe"];
        c.vqe.n = v.value("n", c.vqe.n);
        c.vqe.depth = v.value("depth", c.vqe.depth);
        c.vqe.instance_seed = v.value("instance_seed", c.vqe.instance_seed);
        c.vqe.init_seed = v.value("init_seed", c.vqe.init_seed);
        c.vqe.weight_range = range_from_json(v.value("weight_range", json()), c.vqe.weight_range);
        c.vqe.integer_weights = v.value("integer_weights", c.vqe.integer_weights);
        if (v.contains("optimizer")) c.vqe.opt = optimizer_from_json(v["optimizer"]);
    }
    if (j.contains("sweep")) {
        const json& s = j["sweep"];
        c.sweep.ns = s.value("ns", c.sweep.ns);
        if (s.contains("depths")) {
            c.sweep.depths.clear();
            for (const auto& [key, value] : s["depths"].items()) {
                c.sweep.depths[std::stoi(key)] = value.get<std::vector<int>>();
            }
        }
        c.sweep.instances = s.value("instances", c.sweep.instances);
        c.sweep.inits = s.value("inits", c.sweep.inits);
        c.sweep.weight_range = range_from_json(s.value("weight_range", json()), c.sweep.weight_range);
        c.sweep.integer_weights = s.value("integer_weights", c.sweep.integer_weights);
        if (s.contains("optimizer")) c.sweep.opt = optimizer_from_json(s["optimizer"]);
    }
    if (j.contains("dnc")) {
        const json& d = j["dnc"];
        c.dnc.fixture = d.value("fixture", c.dnc.fixture);
        c.dnc.n = d.value("n", c.dnc.n);
        c.dnc.instance_seed = d.value("instance_seed", c.dnc.instance_seed);
        c.dnc.integer_weights = d.value("integer_weights", c.dnc.integer_weights);
        c.dnc.weight_range = range_from_json(d.value("weight_range", json()), c.dnc.weight_range);
        c.dnc.lambda = d.value("lambda", c.dnc.lambda);
        c.dnc.mu = d.value("mu", c.dnc.mu);
        if (d.contains("run")) c.dnc.run = dnc_run_from_json(d["run"]);
        c.dnc.variants = d.value("variants", c.dnc.variants);
    }
    if (j.contains("mitigation")) {
        const json& m = j["mitigation"];
        c.mitigation.trials = m.value("trials", c.mitigation.trials);
        c.mitigation.qubits = m.value("qubits", c.mitigation.qubits);
        c.mitigation.shots = m.value("shots", c.mitigation.shots);
        c.mitigation.perturbation = m.value("perturbation", c.mitigation.perturbation);
        c.mitigation.noise_p01 = m.value("noise_p01", c.mitigation.noise_p01);
        c.mitigation.noise_p10 = m.value("noise_p10", c.mitigation.noise_p10);
        c.mitigation.ibu.iterations = m.value("ibu_iterations", c.mitigation.ibu.iterations);
        c.mitigation.ibu.stop_tol = m.value("ibu_stop_tol", c.mitigation.ibu.stop_tol);
    }
    if (j.contains("report")) c.report.inputs = j["report"].value("inputs", c.report.inputs);
    return c;
}

std::uint64_t ExperimentConfig::hash() const {
    // Location and parallelism do not affect results; the hash pins only
    // the result-determining fields so a replay elsewhere checks out equal.
    json j = json::parse(to_json());
    j.erase("out");
    j.erase("workers");
    return fnv1a64(j.dump());
}

void OutputBundle::add(std::string name, std::string content) {
    files.emplace_back(std::move(name), std::move(content));
}

void OutputBundle::write(const std::string& out_dir, const ExperimentConfig& cfg) const {
    fs::create_directories(out_dir);
    json manifest;
    manifest["artifact_version"] = kArtifactVersion;
    manifest["config_hash"] = hex64(cfg.hash());
    json file_hashes = json::object();
    for (const auto& [name, content] : files) {
        fs::path p = fs::path(out_dir) / name;
        std::ofstream f(p, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + p.string());
        f << content;
        f.close();
        if (!f) throw std::runtime_error("write failed for " + p.string());
        file_hashes[name] = hex64(fnv1a64(content));
    }
    manifest["files"] = file_hashes;
    manifest["wall_clock"] = {
        {"written_unix_ms",
         std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
             .count()}};
    std::ofstream mf(fs::path(out_dir) / "manifest.json", std::ios::binary);
    mf << manifest.dump(2) << "\n";
}

std::string instance_fixture_json(const TspInstance& inst, const ExactSolution& exact) {
    json j;
    j["n"] = inst.n;
    j["seed"] = inst.seed;
    j["weight_range"] = range_to_json(inst.range);
    j["integer_weights"] = inst.integer_weights;
    j["dist"] = inst.dist;
    j["optimal_length"] = exact.optimal_length;
    j["optimal_tours"] = exact.optimal_tours;
    return j.dump(2);
}

TspInstance read_instance_fixture(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open fixture " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    json j = json::parse(ss.str());
    TspInstance inst = instance_from_matrix(j.at("n").get<int>(),
                                            j.at("dist").get<std::vector<double>>(),
                                            j.value("seed", std::uint64_t{0}));
    inst.range = range_from_json(j.value("weight_range", json()), inst.range);
    inst.integer_weights = j.value("integer_weights", false);
    return inst;
}

std::uint64_t file_checksum(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return fnv1a64(ss.str());
}

namespace {

std::string csv_prelude(const ExperimentConfig& cfg) {
    return "# config_hash=" + hex64(cfg.hash()) + "\n";
}

std::string instance_file_name(int n, int idx) {
    return "instance_n" + std::to_string(n) + "_i" + std::to_string(idx) + ".json";
}

} // namespace

OutputBundle cmd_gen_instances(const ExperimentConfig& cfg) {
    OutputBundle out;
    for (int n : cfg.gen.ns) {
        for (int i = 0; i < cfg.gen.count; ++i) {
            std::uint64_t seed = sweep_instance_seed(cfg.seed, n, i);
            TspInstance inst =
                generate_instance(n, seed, cfg.gen.weight_range, cfg.gen.integer_weights);
            ExactSolution exact = solve_exact(inst);
            out.add(instance_file_name(n, i), instance_fixture_json(inst, exact) + "\n");
        }
    }
    out.add("config.json", cfg.to_json() + "\n");
    return out;
}

OutputBundle cmd_solve_exact(const ExperimentConfig& cfg) {
    if (cfg.solve.input.empty()) throw std::invalid_argument("solve-exact: no input fixture");
    TspInstance inst = read_instance_fixture(cfg.solve.input);
    ExactSolution exact = solve_exact(inst);
    json j;
    j["n"] = inst.n;
    j["seed"] = inst.seed;
    j["optimal_length"] = exact.optimal_length;
    j["optimal_tours"] = exact.optimal_tours;
    OutputBundle out;
    out.add("solution.json", j.dump(2) + "\n");
    out.add("config.json", cfg.to_json() + "\n");
    return out;
}

OutputBundle cmd_run_vqe(const ExperimentConfig& cfg) {
    TspInstance inst = generate_instance(cfg.vqe.n, cfg.vqe.instance_seed, cfg.vqe.weight_range,
                                         cfg.vqe.integer_weights);
    ReducedEncoding enc = ReducedEncoding::for_cities(inst.n);
    ExactSolution exact = solve_exact(inst);
    VqeRunResult r = run_vqe(inst, enc, exact, cfg.vqe.depth, cfg.vqe.init_seed, cfg.vqe.opt);

    std::string csv = csv_prelude(cfg) + "iteration,energy\n";
    for (std::size_t i = 0; i < r.energy_trace.size(); ++i) {
        csv += std::to_string(i) + "," + fmt(r.energy_trace[i]) + "\n";
    }

    json j;
    j["n"] = cfg.vqe.n;
    j["depth"] = cfg.vqe.depth;
    j["instance_seed"] = cfg.vqe.instance_seed;
    j["init_seed"] = cfg.vqe.init_seed;
    j["final_energy"] = r.final_energy;
    j["optimal_length"] = exact.optimal_length;
    j["success"] = r.success;
    j["best_tour"] = r.best_tour.to_full_tour();
    j["best_tour_probability"] = r.best_tour_probability;
    j["argmax_ties"] = r.argmax_ties;
    j["iterations_used"] = r.iterations_used;

    OutputBundle out;
    out.add("vqe_trace.csv", csv);
    out.add("vqe_result.json", j.dump(2) + "\n");
    out.add("config.json", cfg.to_json() + "\n");
    return out;
}

DepthSweepConfig make_sweep_config(const ExperimentConfig& cfg) {
    DepthSweepConfig sc;
    sc.ns = cfg.sweep.ns;
    sc.depths = cfg.sweep.depths;
    sc.instances_per_n = cfg.sweep.instances;
    sc.inits_per_instance = cfg.sweep.inits;
    sc.root_seed = cfg.seed;
    sc.weight_range = cfg.sweep.weight_range;
    sc.integer_weights = cfg.sweep.integer_weights;
    sc.opt = cfg.sweep.opt;
    sc.workers = cfg.workers;
    if (cfg.paper_scale) {
        sc.instances_per_n = 10;
        sc.inits_per_instance = 100;
        sc.depths.clear();
        for (int n : sc.ns) {
            std::vector<int> ls;
            for (int L = n - 1; L <= 30; ++L) ls.push_back(L);
            sc.depths[n] = ls;
        }
    }
    return sc;
}

OutputBundle cmd_sweep_depth(const ExperimentConfig& cfg) {
    SweepResult result = depth_sweep(make_sweep_config(cfg));

    std::string csv = csv_prelude(cfg) + "n,L,instance_seed,init_seed,success,final_energy,iterations\n";
    for (const auto& r : result.runs) {
        csv += std::to_string(r.n) + "," + std::to_string(r.L) + "," + std::to_string(r.instance_seed) +
               "," + std::to_string(r.init_seed) + "," + (r.success ? "1" : "0") + "," +
               fmt(r.final_energy) + "," + std::to_string(r.iterations) + "\n";
    }

    json agg;
    agg["config_hash"] = hex64(cfg.hash());
    agg["aggregates"] = json::array();
    for (const auto& a : result.aggregates) {
        agg["aggregates"].push_back(
            {{"n", a.n}, {"L", a.L}, {"mean", a.mean}, {"min", a.min}, {"max", a.max}});
    }

    OutputBundle out;
    out.add("sweep_runs.csv", csv);
    out.add("sweep_aggregate.json", agg.dump(2) + "\n");
    out.add("config.json", cfg.to_json() + "\n");
    return out;
}

namespace {

DncVariant variant_from(const std::string& s) {
    if (s == "noiseless") return DncVariant::Noiseless;
    if (s == "raw") return DncVariant::Raw;
    if (s == "ibu") return DncVariant::Ibu;
    if (s == "inversion") return DncVariant::Inversion;
    throw std::invalid_argument("unknown variant: " + s);
}

} // namespace

OutputBundle cmd_run_dnc(const ExperimentConfig& cfg) {
    if (cfg.dnc.variants.empty()) throw std::invalid_argument("run-dnc: no variants configured");
    TspInstance inst = cfg.dnc.fixture.empty()
                           ? generate_instance(cfg.dnc.n, cfg.dnc.instance_seed,
                                               cfg.dnc.weight_range, cfg.dnc.integer_weights)
                           : read_instance_fixture(cfg.dnc.fixture);
    ReducedEncoding enc = ReducedEncoding::for_cities(inst.n);
    double lambda = cfg.dnc.lambda > 0.0 ? cfg.dnc.lambda : default_penalty(inst);
    double mu = cfg.dnc.mu > 0.0 ? cfg.dnc.mu : default_penalty(inst);
    DiagonalHamiltonian h = build_hamiltonian(inst, enc, lambda, mu);
    SubsystemPartition part = SubsystemPartition::per_register(enc);

    OutputBundle out;
    {
        std::ostringstream terms_csv;
        terms_csv << "# config_hash=" << hex64(cfg.hash()) << "\n";
        write_pauli_csv(terms_csv, expand_pauli(h));
        out.add("pauli_terms.csv", terms_csv.str());
    }
    std::string summary = csv_prelude(cfg) + "variant,final_loss,final_target_probability\n";
    for (const auto& name : cfg.dnc.variants) {
        DncVariant v = variant_from(name);
        DncRunResult r = run_dnc_spsa(inst, enc, h, part, v, cfg.dnc.run, cfg.seed);
        std::string csv = csv_prelude(cfg) + "iteration,variant,loss,target_prob\n";
        for (const auto& pt : r.trace) {
            csv += std::to_string(pt.iteration) + "," + name + "," + fmt(pt.loss) + "," +
                   fmt(pt.target_prob) + "\n";
        }
        out.add("dnc_trace_" + name + ".csv", csv);
        summary += name + "," + fmt(r.final_loss) + "," + fmt(r.final_target_prob) + "\n";
    }
    out.add("dnc_summary.csv", summary);
    out.add("config.json", cfg.to_json() + "\n");
    return out;
}

OutputBundle cmd_mitigation_study(const ExperimentConfig& cfg) {
    const auto& mc = cfg.mitigation;
    if (mc.trials < 1) throw std::invalid_argument("mitigation-study: need at least one trial");
    ConfusionModel truth = ConfusionModel::per_qubit_flips(mc.qubits, mc.noise_p01, mc.noise_p10);
    const int dim = truth.dim;

    std::string csv = csv_prelude(cfg) + "trial,tv_ibu,tv_inversion,ibu_not_worse\n";
    int wins = 0;
    for (int t = 0; t < mc.trials; ++t) {
        std::mt19937_64 gen(rng::derive(cfg.seed, 0x4d495447ULL, t)); // "MITG"

        // Basis-state recovery trial: the truth sits on a simplex vertex,
        // where clipping bites inversion and positivity favors unfolding.
        Histogram p;
        p.p.assign(dim, 0.0);
        p.p[gen() % dim] = 1.0;

        // Measured histogram: finite shots through the true response.
        std::vector<double> pushed(dim, 0.0);
        for (int i = 0; i < dim; ++i) {
            for (int j = 0; j < dim; ++j) pushed[i] += truth.at(i, j) * p.p[j];
        }
        std::vector<long long> counts(dim, 0);
        for (long s = 0; s < mc.shots; ++s) {
            ++counts[rng::sample_index(gen, pushed.data(), pushed.size(), 1.0)];
        }
        Histogram m = Histogram::from_counts(counts);

        // Perturbed calibration: entrywise uniform +-perturbation, clipped,
        // columns renormalized.
        ConfusionModel cal = truth;
        for (double& v : cal.R) {
            v = std::max(0.0, v + rng::uniform(gen, -mc.perturbation, mc.perturbation));
        }
        for (int j = 0; j < dim; ++j) {
            double col = 0.0;
            for (int i = 0; i < dim; ++i) col += cal.at(i, j);
            for (int i = 0; i < dim; ++i) cal.at(i, j) /= col;
        }

        Histogram ibu = mitigate_ibu(cal, m, mc.ibu);
        Histogram inv = mitigate_inversion(cal, m);
        double tv_ibu = total_variation(ibu, p);
        double tv_inv = total_variation(inv, p);
        bool not_worse = tv_ibu <= tv_inv;
        if (not_worse) ++wins;
        csv += std::to_string(t) + "," + fmt(tv_ibu) + "," + fmt(tv_inv) + "," +
               (not_worse ? "1" : "0") + "\n";
    }

    json j;
    j["config_hash"] = hex64(cfg.hash());
    j["trials"] = mc.trials;
    j["ibu_not_worse_fraction"] = static_cast<double>(wins) / mc.trials;

    OutputBundle out;
    out.add("mitigation_trials.csv", csv);
    out.add("mitigation_summary.json", j.dump(2) + "\n");
    out.add("config.json", cfg.to_json() + "\n");
    return out;
}

OutputBundle cmd_report(const ExperimentConfig& cfg) {
    if (cfg.report.inputs.empty()) throw std::invalid_argument("report: no inputs");
    std::string csv = csv_prelude(cfg) + "source,n,L,iteration,variant,metric,value\n";
    for (const auto& path : cfg.report.inputs) {
        std::ifstream f(path);
        if (!f) throw std::runtime_error("report: cannot open " + path);
        std::stringstream ss;
        ss << f.rdbuf();
        const std::string text = ss.str();

        if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
            json j = json::parse(text);
            if (!j.contains("aggregates")) throw std::runtime_error("report: unrecognized JSON input " + path);
            for (const auto& a : j["aggregates"]) {
                const std::string n = std::to_string(a.at("n").get<int>());
                const std::string L = std::to_string(a.at("L").get<int>());
                for (const char* stat : {"mean", "min", "max"}) {
                    csv += "sweep," + n + "," + L + ",,," + stat + "," +
                           fmt(a.at(stat).get<double>()) + "\n";
                }
            }
        } else {
            std::istringstream lines(text);
            std::string line;
            bool header_seen = false;
            while (std::getline(lines, line)) {
                if (line.empty() || line[0] == '#') continue;
                if (!header_seen) {
                    if (line != "iteration,variant,loss,target_prob") {
                        throw std::runtime_error("report: unrecognized CSV input " + path);
                    }
                    header_seen = true;
                    continue;
                }
                std::istringstream row(line);
                std::string iter, variant, loss, prob;
                std::getline(row, iter, ',');
                std::getline(row, variant, ',');
                std::getline(row, loss, ',');
                std::getline(row, prob, ',');
                csv += "dnc,,," + iter + "," + variant + ",loss," + loss + "\n";
                csv += "dnc,,," + iter + "," + variant + ",target_prob," + prob + "\n";
            }
            if (!header_seen) throw std::runtime_error("report: empty CSV input " + path);
        }
    }
    OutputBundle out;
    out.add("report.csv", csv);
    out.add("config.json", cfg.to_json() + "\n");
    return out;
}

int run_command(const ExperimentConfig& cfg) {
    OutputBundle out;
    if (cfg.mode == "gen-instances") out = cmd_gen_instances(cfg);
    else if (cfg.mode == "solve-exact") out = cmd_solve_exact(cfg);
    else if (cfg.mode == "run-vqe") out = cmd_run_vqe(cfg);
    else if (cfg.mode == "sweep-depth") out = cmd_sweep_depth(cfg);
    else if (cfg.mode == "run-dnc") out = cmd_run_dnc(cfg);
    else if (cfg.mode == "mitigation-study") out = cmd_mitigation_study(cfg);
    else if (cfg.mode == "report") out = cmd_report(cfg);
    else throw std::invalid_argument("unknown mode: " + cfg.mode);
    out.write(cfg.out_dir, cfg);
    return 0;
}

} // namespace qtsp
