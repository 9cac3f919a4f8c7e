#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "transq/config.hpp"
#include "transq/csv.hpp"
#include "transq/diffusion.hpp"
#include "transq/fluid.hpp"
#include "transq/regimes.hpp"
#include "transq/sim.hpp"
#include "transq/validate.hpp"

using namespace transq;
namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config;
    std::string preset;
    std::optional<uint64_t> seed;
    std::optional<std::string> out;
    std::string mode = "composition";
    std::optional<double> eps_nabla;
    std::optional<std::size_t> n;
    std::optional<std::size_t> replications;
    std::size_t paths = 10;
    uint64_t replication = 0;
};

class Output {
public:
    Output(const RunConfig& cfg, const std::string& sub, const Options& o) : dir_(cfg.out_dir), header_() {
        fs::create_directories(dir_);
        header_.push_back("config=" + cfg.echo);
        std::string ov = "subcommand=" + sub;
        if (!o.preset.empty()) ov += " preset=" + o.preset;
        if (o.seed) ov += " seed=" + fmt(*o.seed);
        if (o.n) ov += " n=" + fmt(*o.n);
        if (o.replications) ov += " replications=" + fmt(*o.replications);
        if (o.eps_nabla) ov += " eps_nabla=" + fmt(*o.eps_nabla);
        header_.push_back(ov);
    }

    std::ofstream open(const std::string& name) {
        const fs::path p = fs::path(dir_) / name;
        std::ofstream os(p, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot write " + p.string());
        written_.push_back(p.string());
        return os;
    }

    void header(CsvWriter& w) const {
        for (const std::string& h : header_) w.comment(h);
    }

    const std::vector<std::string>& written() const { return written_; }
    std::string echo_line() const { return header_[0] + " " + header_[1]; }

private:
    std::string dir_;
    std::vector<std::string> header_;
    std::vector<std::string> written_;
};

RunConfig resolve(const Options& o, const std::string& sub) {
    if (o.config.empty() && o.preset.empty()) throw ConfigError("--config", "one of --config or --preset is required");
    if (!o.config.empty() && !o.preset.empty()) throw ConfigError("--preset", "give either --config or --preset");
    RunConfig cfg = o.config.empty() ? preset_config(o.preset) : load_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (o.out) cfg.out_dir = *o.out;
    if (o.eps_nabla) {
        if (!(*o.eps_nabla > 0.0)) throw ConfigError("--eps-nabla", "must be positive");
        cfg.eps_nabla = *o.eps_nabla;
    }
    if (o.n) cfg.n_list = {*o.n};
    if (o.replications) cfg.replications = *o.replications;
    require_fields(cfg, sub);
    return cfg;
}

FluidSolution fluid_of(const RunConfig& cfg) {
    return solve_fluid(*cfg.arrival, cfg.service->mu(), *cfg.grid, cfg.eps_nabla);
}

void run_fluid(const RunConfig& cfg, Output& out) {
    const FluidSolution fl = fluid_of(cfg);
    {
        std::ofstream os = out.open("fluid.csv");
        CsvWriter w(os);
        out.header(w);
        w.fields("t", "xbar", "psibar", "qbar", "bbar", "zbar", "rho_sup", "rho_effective");
        for (std::size_t k = 0; k < fl.grid.size(); ++k)
            w.fields(fl.grid.at(k), fl.xbar[k], fl.psibar[k], fl.qbar[k], fl.bbar[k], fl.zbar[k], fl.rho_sup[k],
                     fl.rho_eff[k]);
    }
    std::ofstream os = out.open("fluid_summary.csv");
    CsvWriter w(os);
    out.header(w);
    w.fields("key", "value");
    w.fields("tau", fl.tau ? fmt(*fl.tau) : std::string("none"));
    w.fields("t_tilde", fl.t_tilde ? fmt(*fl.t_tilde) : std::string("none"));
    w.fields("eps", fl.eps);
    w.fields("excursions", fl.excursions.size());
    for (const std::string& s : fl.warnings) std::cerr << "warning: " << s << '\n';
}

void run_regimes(const RunConfig& cfg, Output& out) {
    const FluidSolution fl = fluid_of(cfg);
    const RegimeAnnotation ann = classify_continuity(fluid_nabla(fl), classify_regimes(fl));
    std::ofstream os = out.open("regimes.csv");
    CsvWriter w(os);
    out.header(w);
    w.fields("t", "qbar", "regime", "state", "continuity");
    for (std::size_t k = 0; k < fl.grid.size(); ++k)
        w.fields(fl.grid.at(k), fl.qbar[k], regime_name(ann.regime[k]), state_name(ann.state[k]),
                 continuity_name(ann.continuity[k]));
}

void run_simulate(const RunConfig& cfg, Output& out, uint64_t replication) {
    for (std::size_t n : cfg.n_list) {
        const SimConfig sc{n, *cfg.arrival, *cfg.service, cfg.seed, *cfg.grid};
        const QueueTrajectory tr = simulate(sc, replication);
        {
            std::ofstream os = out.open("trajectory_n" + fmt(n) + ".csv");
            CsvWriter w(os);
            out.header(w);
            w.comment("n=" + fmt(n) + " replication=" + fmt(replication));
            w.fields("t", "A", "SB", "Q", "B", "I", "Y", "Z");
            for (std::size_t k = 0; k < tr.grid.size(); ++k)
                w.fields(tr.grid.at(k), tr.A[k], tr.SB[k], tr.Q[k], tr.B[k], tr.I[k], tr.Y[k], tr.Z[k]);
        }
        std::ofstream os = out.open("events_n" + fmt(n) + ".csv");
        CsvWriter w(os);
        out.header(w);
        w.comment("n=" + fmt(n) + " replication=" + fmt(replication));
        w.fields("i", "arrival", "service", "start", "departure");
        for (std::size_t i = 0; i < tr.n; ++i)
            w.fields(i + 1, tr.arrival[i], tr.service[i], tr.start[i], tr.departure[i]);
    }
}

void run_diffusion(const RunConfig& cfg, Output& out, XhatMode mode, std::size_t paths) {
    const FluidSolution fl = fluid_of(cfg);
    const NablaSet nset = fluid_nabla(fl);
    const RegimeAnnotation ann = classify_continuity(nset, classify_regimes(fl));
    const VarianceEnvelope env = variance_envelopes(fl, *cfg.service);
    {
        std::ofstream os = out.open("diffusion_envelope.csv");
        CsvWriter w(os);
        out.header(w);
        w.fields("t", "g", "sigma2");
        for (std::size_t k = 0; k < fl.grid.size(); ++k) w.fields(fl.grid.at(k), env.g[k], env.sigma2[k]);
    }
    std::vector<GridFunction> xhats;
    std::ofstream ps = out.open("diffusion_paths.csv");
    std::ofstream ts = out.open("diffusion_tags.csv");
    CsvWriter pw(ps), tw(ts);
    out.header(pw);
    out.header(tw);
    pw.comment(std::string("mode=") + xhat_mode_name(mode));
    pw.fields("path", "t", "xhat", "ytilde", "qhat", "bhat", "zhat");
    tw.fields("path", "t", "tag", "xhat");
    for (std::size_t p = 0; p < paths; ++p) {
        RngStream rng(cfg.seed, p);
        const DiffusionSample s = sample_diffusion(fl, *cfg.service, nset, ann, mode, rng);
        for (std::size_t k = 0; k < fl.grid.size(); ++k)
            pw.fields(p, fl.grid.at(k), s.xhat[k], s.ytilde[k], s.qhat[k], s.bhat[k], s.zhat[k]);
        for (const PointTag& t : s.tags)
            tw.fields(p, fl.grid.at(t.index), continuity_name(t.tag), s.xhat[t.index]);
        xhats.push_back(s.xhat);
    }
    std::ofstream os = out.open("diffusion_summary.csv");
    CsvWriter w(os);
    out.header(w);
    w.fields("key", "value");
    w.fields("paths", paths);
    w.fields("mode", xhat_mode_name(mode));
    if (const auto k = first_emptying_index(fl)) {
        const EmptyingSummary e = emptying_time(fl, nset, xhats, *k);
        w.fields("emptying_point", e.time);
        w.fields("emptying_slope", e.slope);
        w.fields("emptying_limit_mean", e.mean);
        w.fields("emptying_limit_std", e.std);
        for (std::size_t n : cfg.n_list) {
            w.fields("emptying_predicted_mean_n" + fmt(n), e.predicted_mean(n));
            w.fields("emptying_predicted_std_n" + fmt(n), e.predicted_std(n));
        }
    }
}

void run_validate(const RunConfig& cfg, Output& out) {
    for (std::size_t n : cfg.n_list) {
        const SimConfig sc{n, *cfg.arrival, *cfg.service, cfg.seed, *cfg.grid};
        McOptions opt;
        opt.sample_times = cfg.times;
        McReport rep = mc_envelopes(sc, cfg.replications, opt);
        rep.config_echo = out.echo_line() + " resolved: " + rep.config_echo;
        const std::vector<KsRow> ks = ks_at_times(rep);
        const std::vector<LittleRow> little = little_law_rows(rep, cfg.times);
        if (wants_format(cfg, "csv")) {
            std::ofstream os = out.open("validate_n" + fmt(n) + ".csv");
            write_report_csv(os, rep);
        }
        if (wants_format(cfg, "json")) {
            std::ofstream os = out.open("validate_n" + fmt(n) + ".json");
            write_report_json(os, rep, ks, little);
        }
        for (const std::string& s : rep.warnings) std::cerr << "warning: n=" << n << ": " << s << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transitory queue simulator with fluid and diffusion limits"};
    app.require_subcommand(1);
    Options o;
    const char* subs[] = {"simulate", "fluid", "regimes", "diffusion", "validate"};
    for (const char* name : subs) {
        CLI::App* sc = app.add_subcommand(name);
        sc->add_option("--config", o.config, "JSON config file");
        sc->add_option("--preset", o.preset, "built-in config (uniform-exp)");
        sc->add_option("--seed", o.seed, "master seed override");
        sc->add_option("--out", o.out, "output directory override");
        sc->add_option("--eps-nabla", o.eps_nabla, "argmin tolerance override");
        sc->add_option("--n", o.n, "single population size override");
        sc->add_option("--replications", o.replications, "replication count override");
        if (std::string(name) == "diffusion") {
            sc->add_option("--mode", o.mode, "composition or timechange")
                ->check(CLI::IsMember({"composition", "timechange"}));
            sc->add_option("--paths", o.paths, "number of sample paths written");
        }
        if (std::string(name) == "simulate") sc->add_option("--replication", o.replication, "replication index");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    const std::string sub = app.get_subcommands().front()->get_name();
    try {
        const RunConfig cfg = resolve(o, sub);
        Output out(cfg, sub, o);
        if (sub == "fluid") run_fluid(cfg, out);
        else if (sub == "regimes") run_regimes(cfg, out);
        else if (sub == "simulate") run_simulate(cfg, out, o.replication);
        else if (sub == "diffusion") run_diffusion(cfg, out, parse_xhat_mode(o.mode), o.paths);
        else run_validate(cfg, out);
        for (const std::string& p : out.written()) std::cout << p << '\n';
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
