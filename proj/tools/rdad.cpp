#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rdad/rdad.hpp"

namespace {

// Flags shared by every subcommand. Each is applied through the same key = value
// path as the config file, after it, so flags win.
const std::vector<std::pair<std::string, std::string>> kSettings = {
    {"n", "signal dimension"},
    {"seed", "master seed"},
    {"grid", "normalized distortions, 'a,b,c' or 'start:step:stop'"},
    {"loc", "localizations of the normal source"},
    {"compressor", "rdc, pcc or both (comma separated)"},
    {"detector", "ld, npd or both (comma separated)"},
    {"out", "output file (stdout when omitted)"},
    {"anomalies", "sampled anomalies per operating point"},
    {"ok", "normal instances per evaluation"},
    {"ko", "anomalous instances per evaluation"},
    {"threads", "worker threads"},
    {"samples", "samples per rate estimate"},
    {"dims", "dimensions for the concentration sweep"},
    {"population", "anomalies per dimension in the concentration sweep"},
};

struct Invocation {
    std::string config_path;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
};

void add_settings(CLI::App* cmd, Invocation& inv) {
    cmd->add_option("--config", inv.config_path, "key = value settings file")->check(CLI::ExistingFile);
    for (const auto& [key, help] : kSettings) {
        inv.options[key] = cmd->add_option("--" + key, inv.values[key], help);
    }
}

rdad::ExperimentConfig resolve(const Invocation& inv) {
    rdad::ExperimentConfig cfg;
    if (!inv.config_path.empty()) {
        std::ifstream in(inv.config_path);
        if (!in) throw rdad::DomainError("cannot open " + inv.config_path);
        for (const auto& [key, value] : rdad::parse_key_values(in)) rdad::apply_setting(cfg, key, value);
    }
    for (const auto& [key, opt] : inv.options) {
        if (opt->count() > 0) rdad::apply_setting(cfg, key, inv.values.at(key));
    }
    return cfg;
}

template <class Write>
void with_output(const std::string& path, Write&& write) {
    if (path.empty()) {
        write(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw rdad::DomainError("cannot write " + path);
    write(out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distinguishability of anomalies in compressed Gaussian signals"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(rdad::kVersion));

    Invocation rd, theory, conc, run, auc;
    std::string scores_path;
    auto* rd_cmd = app.add_subcommand("rd-curve", "rate against distortion for each compressor");
    auto* theory_cmd = app.add_subcommand("theory-curve", "white-anomaly zeta and kappa with the zeta root");
    auto* conc_cmd = app.add_subcommand("concentration", "spread of sampled anomalies around the identity");
    auto* run_cmd = app.add_subcommand("run", "Monte Carlo sweep of detectors over sampled anomalies");
    auto* auc_cmd = app.add_subcommand("auc", "AUC and psi of a label,score file");
    add_settings(rd_cmd, rd);
    add_settings(theory_cmd, theory);
    add_settings(conc_cmd, conc);
    add_settings(run_cmd, run);
    add_settings(auc_cmd, auc);
    auc_cmd->add_option("scores", scores_path, "CSV of label,score (label ok/ko or 0/1)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*rd_cmd) {
            const auto cfg = resolve(rd);
            cfg.validate();
            const auto rows = rdad::rd_curves(cfg);
            with_output(cfg.output_path, [&](std::ostream& os) {
                rdad::write_rd_curves_csv(os, rows, cfg.n, cfg.master_seed);
            });
        } else if (*theory_cmd) {
            const auto cfg = resolve(theory);
            cfg.validate();
            with_output(cfg.output_path, [&](std::ostream& os) {
                rdad::emit_theory_curves(os, cfg.n, cfg.localizations, cfg.distortion_grid, cfg.master_seed);
            });
        } else if (*conc_cmd) {
            const auto cfg = resolve(conc);
            with_output(cfg.output_path, [&](std::ostream& os) {
                rdad::emit_concentration(os, cfg.dims, cfg.population, cfg.master_seed);
            });
        } else if (*run_cmd) {
            const auto cfg = resolve(run);
            const auto records = rdad::run_experiment(cfg);
            with_output(cfg.output_path, [&](std::ostream& os) {
                rdad::write_records_csv(os, records, cfg.master_seed);
            });
        } else if (*auc_cmd) {
            const auto cfg = resolve(auc);
            std::ifstream in(scores_path);
            if (!in) throw rdad::DomainError("cannot open " + scores_path);
            const rdad::ScoreSets scores = rdad::read_labeled_scores(in);
            const double a = rdad::auc(scores.ok, scores.ko);
            with_output(cfg.output_path, [&](std::ostream& os) {
                os << "n_ok,n_ko,auc,psi\n"
                   << scores.ok.size() << ',' << scores.ko.size() << ',' << rdad::csv::num(a) << ','
                   << rdad::csv::num(rdad::psi(a)) << '\n';
            });
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
