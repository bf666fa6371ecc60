// Command-line harness: config parsing, experiment dispatch, artifact writing.
//
// Exit codes: 0 success (including experiments whose verdict is fail, which is
// a result, not an error), 1 run failure, 2 config error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cbo/constants.hpp"
#include "cbo/dynamics.hpp"
#include "cbo/experiments.hpp"
#include "cbo/io.hpp"
#include "cbo/meanfield.hpp"

namespace fs = std::filesystem;
using cbo::json;

namespace {

json load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw cbo::ConfigError("cannot read config file '" + path + "'");
    json root = json::parse(is, nullptr, false);
    if (root.is_discarded())
        throw cbo::ConfigError("malformed JSON in '" + path + "'");
    return root;
}

void write_tables(const std::vector<cbo::SweepTable>& tables, const fs::path& out_dir,
                  json& artifact_list) {
    for (const auto& table : tables) {
        std::ostringstream os;
        cbo::write_table_csv(table, os);
        const fs::path file = out_dir / (table.name + ".csv");
        cbo::write_text_file(file, os.str());
        artifact_list.push_back(file.string());
    }
}

int dispatch(const std::string& command, const json& root, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    cbo::write_text_file(out_dir / "config.json", root.dump(2) + "\n");
    json summary;
    summary["command"] = command;
    summary["config_echo"] = root;
    json artifacts = json::array();

    if (command == "run") {
        const cbo::CboConfig cfg = cbo::config_from_json(root.at("cbo"));
        const cbo::ObjectiveSpec spec =
            cbo::objective_from_json(root.at("objective"), cfg.dim);
        const long record_every = root.at("cbo").value("record_every", 10);
        const cbo::RunRecord rec = cbo::run_cbo(cfg, spec, record_every);

        std::ostringstream os;
        cbo::write_run_csv(rec, os);
        const fs::path csv = out_dir / "run.csv";
        cbo::write_text_file(csv, os.str());
        artifacts.push_back(csv.string());

        const auto& last = rec.rows.back();
        summary["seed"] = cfg.seed;
        summary["terminal"] = {{"k", last.k},
                               {"mse", last.mse},
                               {"best_value", last.best_value},
                               {"best_index", last.best_index},
                               {"ess", last.ess}};
        summary["warnings"] = cbo::config_warnings(cfg, spec);
        if (cfg.zeta < 1.0) {
            const double c1 = 1.0 / (1.0 + 2.0 / (spec.lambda * cfg.gamma));
            const double t1 = std::log(72.0) / c1;
            summary["K0_report"] =
                std::pow(2.0 + 2.0 * cfg.eta0 / ((1.0 - cfg.zeta) * t1),
                         1.0 / (1.0 - cfg.zeta));
        }
        summary["artifacts"] = artifacts;
        cbo::write_text_file(out_dir / "summary.json", summary.dump(2) + "\n");
        std::cout << "run: terminal mse " << cbo::format_full(last.mse) << " -> "
                  << (out_dir / "run.csv").string() << " "
                  << (out_dir / "summary.json").string() << "\n";
        return 0;
    }

    if (command == "meanfield") {
        const cbo::CboConfig cfg = cbo::config_from_json(root.at("cbo"));
        const cbo::ObjectiveSpec spec =
            cbo::objective_from_json(root.at("objective"), cfg.dim);
        const json exp = root.value("experiment", json::object());
        const double T = exp.value("T", 10.0);
        const double h = exp.value("h", 0.01);
        const long samples = exp.value("samples", 20000L);
        const auto flow = cbo::integrate_mean_flow(spec, cfg, T, h, samples);

        cbo::SweepTable tab;
        tab.name = "flow";
        tab.header = {"t"};
        for (int j = 0; j < cfg.dim; ++j) tab.header.push_back("x_" + std::to_string(j));
        for (int j = 0; j < cfg.dim; ++j) tab.header.push_back("m_" + std::to_string(j));
        tab.header.push_back("gamma_t");
        for (const auto& st : flow) {
            cbo::Vec row{st.t};
            row.insert(row.end(), st.x_t.begin(), st.x_t.end());
            row.insert(row.end(), st.m_t.begin(), st.m_t.end());
            row.push_back(st.gamma_t);
            tab.rows.push_back(std::move(row));
        }
        write_tables({tab}, out_dir, artifacts);

        const auto& last = flow.back();
        summary["terminal"] = {{"t", last.t},
                               {"m_t", last.m_t},
                               {"gamma_t", last.gamma_t},
                               {"second_moment", cbo::sq_dist(last.m_t, spec.x_star) +
                                                     cfg.dim * last.gamma_t / cfg.alpha}};
        summary["artifacts"] = artifacts;
        cbo::write_text_file(out_dir / "summary.json", summary.dump(2) + "\n");
        std::cout << "meanfield: integrated to t = " << T << " -> "
                  << (out_dir / "flow.csv").string() << "\n";
        return 0;
    }

    if (command == "constants") {
        const cbo::CboConfig cfg = cbo::config_from_json(root.at("cbo"));
        const cbo::ObjectiveSpec spec =
            cbo::objective_from_json(root.at("objective"), cfg.dim);
        const double c_lap = root.value("experiment", json::object()).value("c_lap", 0.18);
        const cbo::ConstantsReport rep = cbo::table_constants(spec, cfg, c_lap);
        cbo::write_text_file(out_dir / "constants.json",
                             cbo::constants_to_json(rep).dump(2) + "\n");
        std::cout << "constants: c1 = " << rep.c1 << ", C0 = " << rep.C0 << " -> "
                  << (out_dir / "constants.json").string() << "\n";
        return 0;
    }

    // Experiment commands share the plan schema.
    cbo::ExperimentPlan plan = cbo::plan_from_json(root);
    if (command == "laplace")
        plan.kind = cbo::ExperimentKind::laplace_sweep;
    else if (command == "poc")
        plan.kind = cbo::ExperimentKind::poc_sweep;
    else if (command == "euler")
        plan.kind = cbo::ExperimentKind::euler_sweep;
    else if (command == "theorem1")
        plan.kind = cbo::ExperimentKind::theorem1_rate;
    else if (command == "theorem2")
        plan.kind = cbo::ExperimentKind::theorem2_scaling;
    else if (command == "theorem3")
        plan.kind = cbo::ExperimentKind::theorem3_best;
    else if (command == "blockcheck")
        plan.kind = cbo::ExperimentKind::block_check;
    else
        throw cbo::ConfigError("unknown command '" + command + "'");

    const cbo::ExperimentResult result = cbo::run_experiment(plan);
    write_tables(result.tables, out_dir, artifacts);
    json verdict = cbo::verdict_to_json(result.verdict);
    verdict["config_echo"] = root;
    verdict["artifacts"] = artifacts;
    cbo::write_text_file(out_dir / "verdict.json", verdict.dump(2) + "\n");

    std::cout << result.verdict.kind << ": " << (result.verdict.pass ? "pass" : "FAIL");
    for (const auto& [key, value] : result.verdict.metrics)
        std::cout << " " << key << "=" << cbo::format_full(value);
    std::cout << " -> " << (out_dir / "verdict.json").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"clipped consensus-based optimization: runs, mean-field flow, "
                 "scaling experiments"};
    app.fallthrough();
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::string> overrides;
    int threads = 1;
    std::int64_t seed_override = -1;

    app.add_option("--config", config_path, "JSON config file")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--set", overrides, "dotted-key override, e.g. cbo.alpha=200");
    app.add_option("--threads", threads, "worker cap (never affects results)");
    app.add_option("--seed", seed_override, "override cbo.seed");

    for (const char* name : {"run", "meanfield", "laplace", "poc", "euler", "constants",
                             "theorem1", "theorem2", "theorem3", "blockcheck"})
        app.add_subcommand(name);

    CLI11_PARSE(app, argc, argv);
    cbo::set_max_threads(threads);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        json root = load_config(config_path);
        for (const auto& assignment : overrides) cbo::apply_override(root, assignment);
        if (seed_override >= 0) {
            if (!root.contains("cbo")) throw cbo::ConfigError("missing required section 'cbo'");
            root["cbo"]["seed"] = static_cast<std::uint64_t>(seed_override);
        }
        return dispatch(command, root, out_dir);
    } catch (const cbo::ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    } catch (const json::exception& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "run failure: " << err.what() << "\n";
        return 1;
    }
}
