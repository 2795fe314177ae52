// Command-line front end: run / continuation / mms / report.
// Exit codes: 0 success, 2 configuration error, 3 solver failure, 4 I/O error.

#include "thermch/drivers.hpp"
#include "thermch/io.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw thermch::io_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <class T>
std::vector<T> split_list(const std::string& text) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::stringstream conv(item);
        T v;
        if (!(conv >> v))
            throw std::invalid_argument("bad list element '" + item + "'");
        out.push_back(v);
    }
    return out;
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool isothermal = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "configuration file path");
    cmd->add_option("--out", o.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", o.seed, "RNG seed (overrides config)")
        ->each([&o](const std::string&) { o.seed_set = true; });
    cmd->add_flag("--isothermal", o.isothermal,
                  "freeze theta at its initial constant (requires uniform theta0)");
}

thermch::RunConfig load(const CommonOpts& o) {
    thermch::RunConfig cfg;
    if (!o.config_path.empty())
        cfg = thermch::parse_config(slurp(o.config_path));
    if (!o.out_dir.empty()) cfg.output.dir = o.out_dir;
    if (o.seed_set) cfg.initial.seed = o.seed;
    if (o.isothermal) cfg.solver.isothermal = true;
    cfg.validate();
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"non-isothermal Cahn-Hilliard simulator and diagnostics"};
    app.require_subcommand(1);

    CommonOpts run_o, cont_o, mms_o, report_o;
    std::string ladder_text = "1e-2,1e-3,1e-4,1e-5";
    std::string levels_text = "32,64,128";

    CLI::App* c_run = app.add_subcommand("run", "single simulation run");
    add_common(c_run, run_o);

    CLI::App* c_cont = app.add_subcommand(
        "continuation", "same scenario over a decreasing regularization ladder");
    add_common(c_cont, cont_o);
    c_cont->add_option("--eps-ladder", ladder_text,
                       "comma-separated decreasing regularization magnitudes");

    CLI::App* c_mms = app.add_subcommand(
        "mms", "manufactured-solution convergence study");
    add_common(c_mms, mms_o);
    c_mms->add_option("--levels", levels_text, "comma-separated grid sizes (>= 3)");

    CLI::App* c_report = app.add_subcommand(
        "report", "re-derive diagnostics from stored snapshots");
    add_common(c_report, report_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (c_run->parsed()) return thermch::cmd_run(load(run_o));
        if (c_cont->parsed())
            return thermch::cmd_continuation(load(cont_o),
                                             split_list<double>(ladder_text));
        if (c_mms->parsed())
            return thermch::cmd_mms(load(mms_o), split_list<int>(levels_text));
        if (c_report->parsed()) return thermch::cmd_report(load(report_o));
    } catch (const thermch::io_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 4;
    } catch (const thermch::step_error& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
