// Acceptance suite: every criterion runs at its stated tolerance from a
// golden config and prints one pass/fail line, including the runtime budget.
// Exit code is the number of failed criteria.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "kinetic/experiments.hpp"

using namespace kinetic;

namespace {

const std::filesystem::path kConfigDir = KINETIC_CONFIG_DIR;
const std::filesystem::path kTmpDir = KINETIC_ACCEPT_TMP;

int g_failures = 0;

struct CriterionResult {
    bool pass = false;
    double seconds = 0;
    std::string detail;
};

void print_line(const std::string& label, const CriterionResult& r, double budget_s) {
    const bool in_budget = r.seconds <= budget_s;
    const bool ok = r.pass && in_budget;
    if (!ok) ++g_failures;
    std::printf("[%s] %-52s %6.1f s (budget %.0f s)%s%s\n", ok ? "PASS" : "FAIL", label.c_str(),
                r.seconds, budget_s, r.detail.empty() ? "" : "  -- ", r.detail.c_str());
    std::fflush(stdout);
}

CriterionResult run_config(const std::string& config_name, int threads = 0,
                           const std::filesystem::path& out = {}) {
    CriterionResult res;
    Stopwatch timer;
    try {
        Config cfg = Config::parse_file((kConfigDir / config_name).string());
        const int hw = threads > 0
                           ? threads
                           : std::max(1u, std::thread::hardware_concurrency());
        RunContext ctx = make_context(std::move(cfg), out, hw);
        const ExperimentReport rep = run_experiment(ctx);
        emit_outputs(rep, ctx);
        res.pass = rep.all_pass();
        if (!res.pass) {
            for (const auto& [k, v] : rep.verdicts)
                if (!v) res.detail += k + " ";
        }
    } catch (const std::exception& e) {
        res.pass = false;
        res.detail = e.what();
    }
    res.seconds = timer.seconds();
    return res;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

int main() {
    std::filesystem::create_directories(kTmpDir);
    std::printf("acceptance suite (configs: %s)\n", kConfigDir.string().c_str());

    print_line("1  lambda-family closed form", run_config("c01_lambda_family.cfg"), 30);
    print_line("2  Fehlberg conversion identity", run_config("c02_fehlberg_identity.cfg"), 60);
    print_line("3  ratio-scheme ill-posedness", run_config("c03_ho_illposed.cfg"), 30);
    print_line("4  structural audit", run_config("c04_structural_audit.cfg"), 10);
    print_line("5  Sylvester derivative + bounds", run_config("c05_sylvester.cfg"), 10);

    { // criterion 6 spans the 1D and 2D runs inside one budget
        Stopwatch timer;
        CriterionResult a = run_config("c06a_pde_equivalence_1d.cfg");
        CriterionResult b = run_config("c06b_pde_equivalence_2d.cfg");
        CriterionResult both;
        both.pass = a.pass && b.pass;
        both.seconds = timer.seconds();
        both.detail = a.detail + b.detail;
        print_line("6  PDE form equivalence (1D + 2D)", both, 120);
    }

    print_line("7a density cross-validation, 1D positive",
               run_config("c07a_density_pos_1d.cfg"), 300);
    print_line("7b density cross-validation, 2D positive",
               run_config("c07b_density_pos_2d.cfg"), 300);
    print_line("8  density cross-validation, 2D negative",
               run_config("c08_density_neg_2d.cfg"), 600);
    print_line("9  heterogeneous diffusion suite", run_config("c09_het_diffusion.cfg"), 180);
    print_line("10 scaled Brownian motion", run_config("c10_scaled_bm.cfg"), 10);

    { // criterion 11: byte-identical report.json across reruns and schedules
        Stopwatch timer;
        CriterionResult res;
        const auto d1 = kTmpDir / "det1";
        const auto d2 = kTmpDir / "det2";
        const auto d3 = kTmpDir / "det3";
        const CriterionResult r1 = run_config("c11_determinism.cfg", 1, d1);
        const CriterionResult r2 = run_config("c11_determinism.cfg", 1, d2);
        const CriterionResult r3 = run_config("c11_determinism.cfg", 2, d3);
        const std::string j1 = slurp(d1 / "report.json");
        res.pass = r1.pass && r2.pass && r3.pass && !j1.empty() &&
                   j1 == slurp(d2 / "report.json") && j1 == slurp(d3 / "report.json");
        if (!res.pass) res.detail = "reports differ across reruns";
        res.seconds = timer.seconds();
        print_line("11 deterministic reruns", res, 30);
    }

    std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures;
}
