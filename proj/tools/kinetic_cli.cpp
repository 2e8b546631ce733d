// Experiment driver. One experiment per invocation; deterministic outputs
// under --out; exit code 0 iff every verdict in the report passes.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kinetic/experiments.hpp"

namespace {

struct GlobalOpts {
    std::string config;
    std::string out;
    long seed = -1;
    int threads = 1;
    std::vector<std::string> overrides;
};

int run_kind(const std::string& kind, const GlobalOpts& g) {
    using namespace kinetic;
    try {
        Config cfg = g.config.empty() ? Config::parse_text("")
                                      : Config::parse_file(g.config);
        cfg.apply_override("experiment.kind=" + kind);
        for (const auto& o : g.overrides) cfg.apply_override(o);
        if (g.seed >= 0) cfg.apply_override("run.seed=" + std::to_string(g.seed));
        RunContext ctx = make_context(std::move(cfg), g.out.empty() ? std::filesystem::path{}
                                                                    : std::filesystem::path(g.out),
                                      g.threads);
        Stopwatch timer;
        const ExperimentReport rep = run_experiment(ctx);
        emit_outputs(rep, ctx);
        const double secs = timer.seconds();
        for (const auto& [k, v] : rep.verdicts)
            std::printf("  [%s] %s\n", v ? "pass" : "FAIL", k.c_str());
        std::printf("%s: %s (%zu metrics, %.2f s)%s\n", rep.experiment.c_str(),
                    rep.all_pass() ? "all verdicts pass" : "VERDICT FAILURES", rep.metrics.size(),
                    secs, ctx.emit() ? (", outputs in " + ctx.out_dir.string()).c_str() : "");
        return rep.all_pass() ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic-calculus verification toolkit"};
    app.require_subcommand(1);
    GlobalOpts g;
    app.add_option("--config", g.config, "experiment config file");
    app.add_option("--out", g.out, "output directory for report.json / CSV / SVG");
    app.add_option("--seed", g.seed, "master seed (overrides [run] seed)");
    app.add_option("--threads", g.threads, "worker threads for ensembles");
    app.add_option("--set", g.overrides, "override a config key: section.key=value")
        ->take_all();

    auto* audit = app.add_subcommand("audit", "structural-condition audit of a model set");
    auto* density = app.add_subcommand("density", "Monte Carlo vs PDE density cross-validation");
    auto* integrals = app.add_subcommand("integrals", "stochastic-integral convergence studies");
    auto* hetdiff = app.add_subcommand("hetdiff", "heterogeneous diffusion suite");
    auto* scaledbm = app.add_subcommand("scaledbm", "deterministic-integrand lambda study");
    auto* pdeeq = app.add_subcommand("pde-equivalence", "fick vs standard-form PDE gap");
    auto* list = app.add_subcommand("list-models", "print the model catalog");
    for (auto* sub : {audit, density, integrals, hetdiff, scaledbm, pdeeq, list})
        sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) {
        for (const auto& e : kinetic::model_registry())
            std::printf("%-16s %-7s %s\n", e.name.c_str(), e.kind.c_str(), e.description.c_str());
        return 0;
    }
    if (audit->parsed()) return run_kind("audit", g);
    if (density->parsed()) return run_kind("density", g);
    if (integrals->parsed()) return run_kind("integrals", g);
    if (hetdiff->parsed()) return run_kind("hetdiff", g);
    if (scaledbm->parsed()) return run_kind("scaledbm", g);
    if (pdeeq->parsed()) return run_kind("pde_equivalence", g);
    return 2;
}
