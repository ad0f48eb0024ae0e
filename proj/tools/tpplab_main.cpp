/*
 * tpplab — one binary over the whole laboratory.
 *
 *   simulate    draw sequences from a model spec, write JSONL
 *   validate    fidelity checks of a sequence file against a model spec
 *   train       fit the recurrent intensity model by penalized ERM
 *   construct   assemble a certified network for a target process
 *   bounds      evaluate the perturbation / covering / deviation bounds
 *   experiment  scaling | counterexample | lipschitz studies
 *
 * Every subcommand is deterministic given (config, seed); primary outputs are
 * byte-identical across reruns.  Artifacts embed {tool version, config hash,
 * seed}.  Exit codes: 0 ok, 2 config error, 3 numeric or certification
 * failure, 4 I/O error.  Flags can also be set through the environment with
 * the TPPLAB_ prefix (e.g. TPPLAB_SEED for --seed).
 */

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "tpplab/bounds.hpp"
#include "tpplab/checkpoint.hpp"
#include "tpplab/construct.hpp"
#include "tpplab/errors.hpp"
#include "tpplab/experiments.hpp"
#include "tpplab/quadrature.hpp"
#include "tpplab/rnn.hpp"
#include "tpplab/sequence.hpp"
#include "tpplab/stats.hpp"
#include "tpplab/tpp_models.hpp"
#include "tpplab/train.hpp"

namespace {

using namespace tpplab;

nlohmann::json load_json_file(const std::string& path) {
    const std::string text = read_text_file(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

nlohmann::json artifact_header(const nlohmann::json& config, std::uint64_t seed) {
    return {{"tool", kToolVersion}, {"config_hash", config_hash(config)}, {"seed", seed}};
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError(dir + ": " + ec.message());
}

/* ---- simulate ---- */

int cmd_simulate(const std::string& model_path, std::size_t n, double T_override,
                 std::uint64_t seed, const std::string& out_path) {
    TppModelSpec spec = TppModelSpec::from_json(load_json_file(model_path));
    if (T_override > 0.0) spec.T = T_override;
    validate_model(spec);
    const std::vector<EventSequence> seqs = simulate(spec, n, seed);
    write_jsonl(out_path, seqs);
    double events = 0.0;
    for (const auto& s : seqs) events += static_cast<double>(s.size());
    std::cout << "simulate: wrote " << seqs.size() << " sequences to " << out_path
              << " (mean events " << (seqs.empty() ? 0.0 : events / seqs.size()) << ")\n";
    return 0;
}

/* ---- validate ---- */

int cmd_validate(const std::string& model_path, const std::string& data_path,
                 double quad_tol) {
    const TppModelSpec spec = TppModelSpec::from_json(load_json_file(model_path));
    validate_model(spec);
    const std::vector<EventSequence> seqs = read_jsonl(data_path);
    QuadratureConfig quad;
    if (quad_tol > 0.0) quad.tol = quad_tol;

    double events = 0.0;
    std::vector<double> pooled;
    for (const auto& s : seqs) {
        events += static_cast<double>(s.size());
        const std::vector<double> v = rescaled_exp1_samples(spec, s, quad);
        pooled.insert(pooled.end(), v.begin(), v.end());
    }
    const double mean_count = seqs.empty() ? 0.0 : events / seqs.size();
    std::cout << "validate: " << seqs.size() << " sequences, mean events " << mean_count
              << "\n";
    if (!pooled.empty()) {
        const KsResult ks = ks_test_exp1(pooled);
        std::cout << "validate: time-rescaling KS statistic " << ks.statistic
                  << ", p-value " << ks.p_value << " (" << ks.n
                  << " horizon-corrected interarrivals)\n";
    } else {
        std::cout << "validate: no events, time-rescaling check skipped\n";
    }
    return 0;
}

/* ---- train ---- */

int cmd_train(const std::string& data_path, const std::string& arch_path,
              const std::string& train_path, const std::string& out_dir,
              std::uint64_t seed_override, bool seed_given) {
    const std::vector<EventSequence> data = read_jsonl(data_path);
    const RnnConfig cfg = config_from_json(load_json_file(arch_path));
    TrainConfig tc = train_config_from_json(load_json_file(train_path));
    if (seed_given) tc.seed = seed_override;

    ensure_dir(out_dir);
    const nlohmann::json run_cfg = {{"arch", config_to_json(cfg)},
                                    {"train", train_config_to_json(tc)}};
    const std::string tag = config_hash(run_cfg);
    tc.trace_path = out_dir + "/trace_" + tag + ".csv";

    const TrainResult res = fit_erm(cfg, tc, data);

    nlohmann::json meta = artifact_header(run_cfg, tc.seed);
    meta["train"] = train_config_to_json(tc);
    meta["final_train_nll"] = res.final_train_nll;
    meta["final_val_nll"] = res.final_val_nll;
    meta["epochs_run"] = res.epochs_run;
    meta["best_epoch"] = res.best_epoch;
    const std::string ckpt = out_dir + "/checkpoint_" + tag + ".json";
    save_checkpoint(ckpt, cfg, res.params, meta);
    std::cout << "train: " << res.epochs_run << " epochs, final mean train NLL "
              << res.final_train_nll << ", final mean val NLL " << res.final_val_nll
              << "\n"
              << "train: checkpoint " << ckpt << "\n";
    return 0;
}

/* ---- construct ---- */

int cmd_construct(const std::string& model_path, const std::string& target,
                  double budget, int s0, std::uint64_t seed, const std::string& out_dir) {
    const TppModelSpec spec = TppModelSpec::from_json(load_json_file(model_path));
    validate_model(spec);
    BuildOptions opt;
    opt.s0 = s0;
    opt.seed = seed;

    BuildReport rep;
    if (target == "t4" || target == "poisson") {
        if (spec.family != TppFamily::NonHomPoisson && spec.family != TppFamily::HomPoisson) {
            throw ConfigError("construct: baseline-only build expects a Poisson spec");
        }
        Lambda0Spec lam0 = spec.lambda0;
        if (spec.family == TppFamily::HomPoisson) {
            lam0 = Lambda0Spec::make("constant", {{"value", spec.lambda}});
        }
        rep = build_poisson_approx(lam0, spec.T, budget, opt);
    } else if (target == "t5" || target == "vanilla") {
        rep = build_vanilla_hawkes_approx(spec, budget, opt);
    } else if (target == "t6" || target == "general") {
        rep = build_general_hawkes_approx(spec, budget, opt);
    } else if (target == "t7" || target == "nonlinear") {
        rep = build_nonlinear_hawkes_approx(spec, budget, opt);
    } else {
        throw ConfigError("construct: unknown target '" + target + "'");
    }

    ensure_dir(out_dir);
    const nlohmann::json run_cfg = {{"model", spec.to_json()},
                                    {"target", target},
                                    {"budget", budget},
                                    {"s0", s0},
                                    {"seed", seed}};
    const std::string tag = config_hash(run_cfg);
    nlohmann::json meta = artifact_header(run_cfg, seed);
    meta["certificate"] = rep.certificate;
    meta["budget"] = rep.budget;
    save_checkpoint(out_dir + "/construct_" + tag + ".json", rep.cfg, rep.params, meta);

    nlohmann::json cert = artifact_header(run_cfg, seed);
    cert["certificate"] = rep.certificate;
    cert["budget"] = rep.budget;
    cert["details"] = rep.details;
    write_text_file(out_dir + "/certificate_" + tag + ".json", cert.dump(2) + "\n");

    std::cout << "construct: certificate " << rep.certificate << " against budget "
              << rep.budget << "\n";
    if (!(rep.certificate <= rep.budget)) {
        // builders already throw when infeasible; this is a final guard
        throw CertificationError("construct: certificate exceeds budget");
    }
    return 0;
}

/* ---- bounds ---- */

int cmd_bounds(const std::string& config_path, const std::string& out_dir) {
    const nlohmann::json j = load_json_file(config_path);
    TppModelSpec process;
    RnnConfig cfg;
    double B_m = 0.0, delta = 0.0;
    std::size_t n = 0;
    try {
        process = TppModelSpec::from_json(j.at("process"));
        cfg = config_from_json(j.at("arch"));
        B_m = j.at("B_m").get<double>();
        n = j.at("n").get<std::size_t>();
        delta = j.at("delta").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bounds config: ") + e.what());
    }
    validate_model(process);
    const BoundReport rep = stochastic_error_bound(process, cfg, B_m, n, delta);

    const int L = static_cast<int>(cfg.widths.size());
    int D = 1;
    for (int w : cfg.widths) D = std::max(D, w);

    std::cout << "bounds: deviation value " << rep.value << "\n"
              << "bounds: s0 " << rep.s0 << ", a_N " << rep.a_N << ", c_N " << rep.c_N
              << "\n"
              << "bounds: confidence " << rep.term_confidence << ", complexity "
              << rep.term_complexity << ", tail " << rep.term_tail << "\n";

    nlohmann::json out = artifact_header(j, j.value("seed", 0));
    out["report"] = {{"value", rep.value},
                     {"s0", rep.s0},
                     {"a_N", rep.a_N},
                     {"c_N", rep.c_N},
                     {"term_confidence", rep.term_confidence},
                     {"term_complexity", rep.term_complexity},
                     {"term_tail", rep.term_tail}};
    if (j.contains("eps_sweep")) {
        const int n0 = j.value("n0_events", rep.s0);
        nlohmann::json sweep = nlohmann::json::array();
        std::cout << "bounds: covering_log sweep (eps, value)\n";
        for (double eps : j.at("eps_sweep").get<std::vector<double>>()) {
            const double v = covering_log(eps, L, D, B_m, n0, process.T);
            sweep.push_back({{"eps", eps}, {"covering_log", v}});
            std::cout << "  " << eps << "  " << v << "\n";
        }
        out["covering"] = sweep;
    }
    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        const std::string path = out_dir + "/bounds_" + config_hash(j) + ".json";
        write_text_file(path, out.dump(2) + "\n");
        std::cout << "bounds: wrote " << path << "\n";
    }
    return 0;
}

/* ---- experiment ---- */

int cmd_experiment(const std::string& study, const std::string& config_path,
                   const std::string& out_dir, std::uint64_t seed_override,
                   bool seed_given) {
    const nlohmann::json j =
        config_path.empty() ? nlohmann::json::object() : load_json_file(config_path);
    if (study == "scaling") {
        ScalingConfig sc;
        try {
            sc.truth = TppModelSpec::from_json(j.at("truth"));
            sc.rnn = config_from_json(j.at("arch"));
            sc.train = train_config_from_json(j.value("train", nlohmann::json::object()));
            sc.train_sizes = j.at("train_sizes").get<std::vector<std::size_t>>();
            sc.reps = j.value("reps", sc.reps);
            sc.n_test = j.value("n_test", sc.n_test);
            sc.seed = j.value("seed", sc.seed);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("scaling config: ") + e.what());
        }
        if (seed_given) sc.seed = seed_override;
        sc.out_dir = out_dir;
        const ScalingResult res = scaling_study(sc);
        std::cout << "scaling: mean gaps";
        for (double g : res.mean_gaps) std::cout << " " << g;
        std::cout << "\nscaling: log-log slope " << res.slope << "\n";
        return 0;
    }
    if (study == "counterexample") {
        CounterexampleConfig cc;
        try {
            cc.T = j.value("T", cc.T);
            cc.n_train = j.value("n_train", cc.n_train);
            cc.n_test = j.value("n_test", cc.n_test);
            if (j.contains("arch")) cc.base = config_from_json(j.at("arch"));
            if (j.contains("train")) cc.train = train_config_from_json(j.at("train"));
            cc.seed = j.value("seed", cc.seed);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("counterexample config: ") + e.what());
        }
        if (seed_given) cc.seed = seed_override;
        cc.out_dir = out_dir;
        const CounterexampleResult res = counterexample_study(cc);
        const double floor = res.inf_mismatch.value * res.prob_pinned;
        std::cout << "counterexample: first-interval mismatch " << res.inf_mismatch.value
                  << " at alpha " << res.inf_mismatch.alpha << ", b " << res.inf_mismatch.b
                  << "\n"
                  << "counterexample: gap floor (mismatch x event probability) " << floor
                  << "\n";
        double naive = 0.0, hold = 0.0, embed = 0.0;
        for (const auto& a : res.arms) {
            std::cout << "counterexample: head " << a.head << " gap " << a.gap << " (se "
                      << a.se << ")\n";
            if (a.head == interp_name(InterpMode::LinearInTime)) naive = a.gap;
            if (a.head == interp_name(InterpMode::ConstantHold)) hold = a.gap;
            if (a.head == interp_name(InterpMode::InputEmbedding)) embed = a.gap;
        }
        std::cout << "counterexample: ordering "
                  << ((naive > embed && hold > embed) ? "holds" : "violated")
                  << " (embedding below both baseline heads)\n";
        return 0;
    }
    if (study == "lipschitz") {
        const int trials = j.value("trials", 1000);
        std::uint64_t seed = j.value("seed", 17);
        if (seed_given) seed = seed_override;
        const LipschitzTrialSummary res = lipschitz_trials(trials, seed);
        std::cout << "lipschitz: " << res.trials << " trials, " << res.violations
                  << " violations, max measured/bound ratio " << res.max_ratio
                  << (res.max_ratio <= 1.0 ? " <= 1" : " > 1") << ", worst margin "
                  << res.worst_margin << "\n";
        if (!out_dir.empty()) {
            ensure_dir(out_dir);
            nlohmann::json out = artifact_header(j, seed);
            out["trials"] = res.trials;
            out["violations"] = res.violations;
            out["max_ratio"] = res.max_ratio;
            out["worst_margin"] = res.worst_margin;
            write_text_file(out_dir + "/lipschitz_" + config_hash(j) + ".json",
                            out.dump(2) + "\n");
        }
        return res.violations == 0 ? 0 : 3;
    }
    throw ConfigError("experiment: unknown study '" + study + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"temporal point process laboratory"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    int workers = 0;
    double quad_tol = 0.0;
    app.add_option("--seed", seed, "global seed override")->envname("TPPLAB_SEED");
    app.add_option("--workers", workers,
                   "worker hint; outputs are defined by a fixed reduction order and do "
                   "not depend on it")
        ->envname("TPPLAB_WORKERS");
    app.add_option("--quad-tol", quad_tol, "adaptive quadrature tolerance")
        ->envname("TPPLAB_QUAD_TOL");

    // simulate
    auto* sim = app.add_subcommand("simulate", "draw sequences from a model spec");
    std::string sim_model, sim_out = "sequences.jsonl";
    std::size_t sim_n = 1;
    double sim_T = 0.0;
    sim->add_option("--model", sim_model, "model spec JSON")->required();
    sim->add_option("--n", sim_n, "number of sequences")->required();
    sim->add_option("--T", sim_T, "override the spec horizon");
    sim->add_option("--out", sim_out, "output JSONL path");

    // validate
    auto* val = app.add_subcommand("validate", "check sequences against a model spec");
    std::string val_model, val_data;
    val->add_option("--model", val_model, "model spec JSON")->required();
    val->add_option("--data", val_data, "sequence JSONL")->required();

    // train
    auto* trn = app.add_subcommand("train", "fit the recurrent intensity model");
    std::string trn_data, trn_arch, trn_train, trn_out = "runs";
    trn->add_option("--data", trn_data, "training sequences JSONL")->required();
    trn->add_option("--arch", trn_arch, "architecture config JSON")->required();
    trn->add_option("--train", trn_train, "training config JSON")->required();
    trn->add_option("--out", trn_out, "output directory");

    // construct
    auto* con = app.add_subcommand("construct", "assemble a certified network");
    std::string con_model, con_target, con_out = "runs";
    double con_budget = 0.1;
    int con_s0 = 8;
    con->add_option("--model", con_model, "target process spec JSON")->required();
    con->add_option("--target", con_target,
                    "t4|poisson (baseline only), t5|vanilla (exponential excitation), "
                    "t6|general (smooth kernel), t7|nonlinear (link on top)")
        ->required();
    con->add_option("--budget", con_budget, "certificate budget")->required();
    con->add_option("--s0", con_s0, "admissible event count");
    con->add_option("--out", con_out, "output directory");

    // bounds
    auto* bnd = app.add_subcommand("bounds", "evaluate the non-asymptotic bounds");
    std::string bnd_config, bnd_out;
    bnd->add_option("--config", bnd_config, "bounds config JSON")->required();
    bnd->add_option("--out", bnd_out, "output directory (optional)");

    // experiment
    auto* exp = app.add_subcommand("experiment", "run a study");
    std::string exp_study, exp_config, exp_out = "runs";
    exp->add_option("--study", exp_study, "scaling | counterexample | lipschitz")
        ->required();
    exp->add_option("--config", exp_config, "study config JSON");
    exp->add_option("--out", exp_out, "output directory");

    // let the global --seed / --workers / --quad-tol appear after a subcommand
    for (CLI::App* s : {sim, val, trn, con, bnd, exp}) s->fallthrough();

    CLI11_PARSE(app, argc, argv);
    const bool seed_given = app.count("--seed") > 0;

    try {
        if (*sim) {
            return cmd_simulate(sim_model, sim_n, sim_T, seed_given ? seed : 1, sim_out);
        }
        if (*val) return cmd_validate(val_model, val_data, quad_tol);
        if (*trn) return cmd_train(trn_data, trn_arch, trn_train, trn_out, seed, seed_given);
        if (*con) {
            return cmd_construct(con_model, con_target, con_budget, con_s0,
                                 seed_given ? seed : 2026, con_out);
        }
        if (*bnd) return cmd_bounds(bnd_config, bnd_out);
        if (*exp) return cmd_experiment(exp_study, exp_config, exp_out, seed, seed_given);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const CertificationError& e) {
        std::cerr << "certification failure: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
