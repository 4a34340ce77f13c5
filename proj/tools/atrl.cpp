// Command-line experiment runner: simulate writes a snapshot archive;
// quotients / manifold / embed read it back and emit CSV reports; report
// runs the whole pipeline in one process. Exit codes: 0 success, 2 config
// error, 3 divergence, 4 data integrity.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "atrl/archive.hpp"
#include "atrl/config.hpp"
#include "atrl/experiment.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::int64_t seed = -1;  // <0 keeps the config seed
    std::size_t threads = 1;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "experiment config file")->required();
    cmd->add_option("--out", o.out_dir, "output directory")->required();
    cmd->add_option("--seed", o.seed, "override the integrator seed");
    cmd->add_option("--threads", o.threads, "worker threads for analysis sweeps");
}

atrl::ExperimentConfig load(const CommonOpts& o) {
    atrl::ExperimentConfig cfg = atrl::load_experiment_config(o.config_path);
    if (o.seed >= 0) cfg.integrator.seed = static_cast<std::uint64_t>(o.seed);
    if (o.threads < 1) throw atrl::config_error("cli: --threads must be at least 1");
    std::filesystem::create_directories(o.out_dir);
    return cfg;
}

std::string archive_path(const CommonOpts& o) { return o.out_dir + "/snapshots.atrl"; }

void save_text(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw atrl::config_error("cli: cannot open " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw atrl::config_error("cli: write failed for " + path);
}

void print_sample(const atrl::AttractorSample& s) {
    std::printf("snapshots = %zu\n", s.snapshots.size());
    std::printf("sup_norm = %s\n", atrl::csv_double(s.sup_norm).c_str());
    std::printf("sup_half_norm = %s\n", atrl::csv_double(s.sup_half_norm).c_str());
    std::printf("M0 = %s\n", atrl::csv_double(s.M0).c_str());
    std::printf("M1 = %s\n", atrl::csv_double(s.M1).c_str());
}

int cmd_simulate(const CommonOpts& o) {
    const auto cfg = load(o);
    const auto sim = atrl::run_simulation(cfg);
    atrl::write_archive(archive_path(o), atrl::archive_from_sample(cfg.model.id, sim.sample));
    print_sample(sim.sample);
    return 0;
}

struct LoadedSample {
    atrl::ExperimentConfig cfg;
    atrl::Model model;
    atrl::AttractorSample sample;
};

LoadedSample load_sample(const CommonOpts& o) {
    LoadedSample ls;
    ls.cfg = load(o);
    ls.model = atrl::make_model(ls.cfg.model);
    const atrl::SnapshotArchive arch = atrl::read_archive(archive_path(o));
    if (arch.model != ls.cfg.model.id)
        throw atrl::integrity_error("cli: archive model does not match the configured model");
    ls.sample = atrl::sample_from_fields(atrl::fields_from_archive(arch, ls.model.op), ls.cfg.integrator);
    return ls;
}

int cmd_quotients(const CommonOpts& o) {
    const auto ls = load_sample(o);
    const auto traj = atrl::perturbation_pairs(ls.model, ls.sample.snapshots.front(), ls.cfg);
    const auto art = atrl::quotients_analysis(ls.model, ls.sample, ls.cfg, traj, o.threads);
    save_text(o.out_dir + "/quotients.csv", atrl::quotients_csv(art));
    std::printf("C_full = %s\n", atrl::csv_double(art.rows.front().rep.C_full).c_str());
    return 0;
}

int cmd_manifold(const CommonOpts& o) {
    const auto ls = load_sample(o);
    const auto traj = atrl::perturbation_pairs(ls.model, ls.sample.snapshots.front(), ls.cfg);
    const auto art = atrl::manifold_analysis(ls.model, ls.sample, ls.cfg, traj, o.threads);
    save_text(o.out_dir + "/manifold.csv", atrl::manifold_csv(art));
    if (art.fit_free_ok) std::printf("decay_slope = %s\n", atrl::csv_double(art.fit_free.slope).c_str());
    return 0;
}

int cmd_embed(const CommonOpts& o) {
    const auto ls = load_sample(o);
    const auto art = atrl::embedding_analysis(ls.sample, ls.cfg, o.threads);
    save_text(o.out_dir + "/embed.csv", atrl::embed_csv(art));
    std::printf("d_hat = %s\n", atrl::csv_double(art.d_hat).c_str());
    std::printf("dev_1_hat = %s\n", atrl::csv_double(art.deviation.dev_m_hat).c_str());
    return 0;
}

int cmd_report(const CommonOpts& o) {
    const auto cfg = load(o);
    const auto sim = atrl::run_simulation(cfg);
    atrl::write_archive(archive_path(o), atrl::archive_from_sample(cfg.model.id, sim.sample));
    print_sample(sim.sample);
    const auto traj = atrl::perturbation_pairs(sim.model, sim.sample.snapshots.front(), cfg);
    const auto q = atrl::quotients_analysis(sim.model, sim.sample, cfg, traj, o.threads);
    save_text(o.out_dir + "/quotients.csv", atrl::quotients_csv(q));
    const auto mf = atrl::manifold_analysis(sim.model, sim.sample, cfg, traj, o.threads);
    save_text(o.out_dir + "/manifold.csv", atrl::manifold_csv(mf));
    const auto em = atrl::embedding_analysis(sim.sample, cfg, o.threads);
    save_text(o.out_dir + "/embed.csv", atrl::embed_csv(em));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral attractor laboratory"};
    app.require_subcommand(1);
    CommonOpts o;
    auto* c_sim = app.add_subcommand("simulate", "sample the attractor and write the snapshot archive");
    auto* c_quo = app.add_subcommand("quotients", "log-Dirichlet quotient constants from an archive");
    auto* c_man = app.add_subcommand("manifold", "graph construction and distance decay from an archive");
    auto* c_emb = app.add_subcommand("embed", "random-map embedding diagnostics from an archive");
    auto* c_rep = app.add_subcommand("report", "full pipeline: simulate plus all three reports");
    for (auto* c : {c_sim, c_quo, c_man, c_emb, c_rep}) add_common(c, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (c_sim->parsed()) return cmd_simulate(o);
        if (c_quo->parsed()) return cmd_quotients(o);
        if (c_man->parsed()) return cmd_manifold(o);
        if (c_emb->parsed()) return cmd_embed(o);
        return cmd_report(o);
    } catch (const atrl::config_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const atrl::divergence_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const atrl::integrity_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
