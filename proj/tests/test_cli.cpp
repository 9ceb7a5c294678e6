// End-to-end checks of the command-line driver: exit codes, the no-output
// guarantee for invalid configs, emitted files, and byte-identical reruns.
// Usage: test_cli <path-to-cli-binary>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

static int g_failures = 0;

#define CHECK(cond)                                                          \
    do {                                                                     \
        if (!(cond)) {                                                       \
            ++g_failures;                                                    \
            std::fprintf(stderr, "FAIL %s:%d: %s\n", __FILE__, __LINE__, #cond); \
        }                                                                    \
    } while (0)

static std::string g_cli;
static fs::path g_work;

static int run_cli(const std::string& args) {
    std::string cmd = "\"" + g_cli + "\" " + args + " 2>/dev/null";
    int status = std::system(cmd.c_str());
    if (status < 0) return -1;
#ifdef _WIN32
    return status;
#else
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#endif
}

static void write_text(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
}

static std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <cli-binary>\n");
        return 2;
    }
    g_cli = argv[1];
    g_work = fs::temp_directory_path() / "perorbit_cli_test";
    fs::remove_all(g_work);
    fs::create_directories(g_work);
    const std::string W = g_work.string();

    // --- valid orbits run: exit 0 and the full set of output files ---------
    write_text(g_work / "orb.json",
               "{\"system\": {\"kind\": \"doubling\"}, \"n\": 5, \"alpha\": 0.5,\n"
               " \"potential\": {\"kind\": \"const\", \"value\": -0.3},\n"
               " \"output_dir\": \"" + W + "/out_orb\"}");
    CHECK(run_cli("orbits --config \"" + W + "/orb.json\"") == 0);
    CHECK(fs::exists(g_work / "out_orb/resolved_config.json"));
    CHECK(fs::exists(g_work / "out_orb/orbits.csv"));
    CHECK(fs::exists(g_work / "out_orb/summary.json"));
    CHECK(fs::exists(g_work / "out_orb/manifest.json"));
    {
        std::string csv = slurp(g_work / "out_orb/orbits.csv");
        CHECK(csv.rfind("word,x,lyapunov,ell_min,S_n_phi\n", 0) == 0);
        // 2^5 - 1 fixed points of period 5 plus the header line
        std::size_t lines = 0;
        for (char c : csv) lines += (c == '\n');
        CHECK(lines == 32);
    }

    // --- unknown keys are rejected before any output appears --------------
    write_text(g_work / "bad_top.json",
               "{\"system\": {\"kind\": \"doubling\"}, \"n\": 4, \"bogus\": 1,\n"
               " \"output_dir\": \"" + W + "/out_bad_top\"}");
    CHECK(run_cli("orbits --config \"" + W + "/bad_top.json\"") == 2);
    CHECK(!fs::exists(g_work / "out_bad_top"));

    write_text(g_work / "bad_nested.json",
               "{\"system\": {\"kind\": \"doubling\", \"slope\": 2.0}, \"n\": 4,\n"
               " \"output_dir\": \"" + W + "/out_bad_nested\"}");
    CHECK(run_cli("orbits --config \"" + W + "/bad_nested.json\"") == 2);
    CHECK(!fs::exists(g_work / "out_bad_nested"));

    // --- invalid values are schema violations ------------------------------
    write_text(g_work / "bad_alpha.json",
               "{\"system\": {\"kind\": \"doubling\"}, \"n\": 4, \"alpha\": -0.5,\n"
               " \"output_dir\": \"" + W + "/out_bad_alpha\"}");
    CHECK(run_cli("orbits --config \"" + W + "/bad_alpha.json\"") == 2);
    CHECK(!fs::exists(g_work / "out_bad_alpha"));

    write_text(g_work / "bad_json.json", "{\"system\": {\"kind\": \"doubling\"");
    CHECK(run_cli("orbits --config \"" + W + "/bad_json.json\"") == 2);

    CHECK(run_cli("orbits --config \"" + W + "/no_such_file.json\"") == 2);

    write_text(g_work / "bad_task.json",
               "{\"task\": \"pressure\", \"system\": {\"kind\": \"doubling\"}, \"n\": 4,\n"
               " \"output_dir\": \"" + W + "/out_bad_task\"}");
    CHECK(run_cli("orbits --config \"" + W + "/bad_task.json\"") == 2);
    CHECK(!fs::exists(g_work / "out_bad_task"));

    // --- budget exhaustion maps to exit 3 ----------------------------------
    write_text(g_work / "budget.json",
               "{\"system\": {\"kind\": \"doubling\"},\n"
               " \"potential\": {\"kind\": \"cyl\", \"depth\": 1, \"table\": [1.0, 0.0]},\n"
               " \"v\": 0.5, \"delta\": 0.1, \"n_min\": 20, \"n_max\": 20, \"budget\": 16,\n"
               " \"output_dir\": \"" + W + "/out_budget\"}");
    CHECK(run_cli("ldp --config \"" + W + "/budget.json\"") == 3);
    CHECK(!fs::exists(g_work / "out_budget"));

    // --- unavailable exact oracle maps to exit 4 ----------------------------
    write_text(g_work / "noex.json",
               "{\"system\": {\"kind\": \"tent\", \"slope\": 1.7}, \"operation\": \"pressure\",\n"
               " \"output_dir\": \"" + W + "/out_noex\"}");
    CHECK(run_cli("oracle --config \"" + W + "/noex.json\"") == 4);
    CHECK(!fs::exists(g_work / "out_noex"));

    // --- identical config reruns are byte-identical (manifest aside) -------
    write_text(g_work / "pr.json",
               "{\"system\": {\"kind\": \"doubling\"},\n"
               " \"potential\": {\"kind\": \"cyl\", \"depth\": 1, \"table\": [0.4, -0.2]},\n"
               " \"alpha\": 0.5, \"ells\": [1, 4], \"n_max\": 9,\n"
               " \"output_dir\": \"" + W + "/out_pr\"}");
    CHECK(run_cli("pressure --config \"" + W + "/pr.json\"") == 0);
    std::string csv1 = slurp(g_work / "out_pr/pressure.csv");
    std::string sum1 = slurp(g_work / "out_pr/summary.json");
    std::string res1 = slurp(g_work / "out_pr/resolved_config.json");
    CHECK(run_cli("pressure --config \"" + W + "/pr.json\"") == 0);
    CHECK(slurp(g_work / "out_pr/pressure.csv") == csv1);
    CHECK(slurp(g_work / "out_pr/summary.json") == sum1);
    CHECK(slurp(g_work / "out_pr/resolved_config.json") == res1);
    CHECK(!csv1.empty() && !sum1.empty() && !res1.empty());

    // --- flag overrides land in the resolved config -------------------------
    CHECK(run_cli("pressure --config \"" + W + "/pr.json\" --nmax 7 --output-dir \"" + W +
                  "/out_pr7\"") == 0);
    {
        std::string res = slurp(g_work / "out_pr7/resolved_config.json");
        CHECK(res.find("\"n_max\": 7") != std::string::npos);
        std::string csv = slurp(g_work / "out_pr7/pressure.csv");
        CHECK(csv.find("\n8,") == std::string::npos);  // no rows beyond n_max
    }

    // --- defaults are written back into the resolved config -----------------
    write_text(g_work / "min.json",
               "{\"system\": {\"kind\": \"doubling\"}, \"n\": 3,\n"
               " \"output_dir\": \"" + W + "/out_min\"}");
    CHECK(run_cli("orbits --config \"" + W + "/min.json\"") == 0);
    {
        std::string res = slurp(g_work / "out_min/resolved_config.json");
        CHECK(res.find("\"alpha\": 0.5") != std::string::npos);
        CHECK(res.find("\"budget\": 16777216") != std::string::npos);
        CHECK(res.find("\"seed\": 0") != std::string::npos);
        CHECK(res.find("\"task\": \"orbits\"") != std::string::npos);
    }

    if (g_failures == 0) {
        std::printf("test_cli: all checks passed\n");
        return 0;
    }
    std::fprintf(stderr, "test_cli: %d check(s) failed\n", g_failures);
    return 1;
}
