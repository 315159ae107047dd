#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "levy/cli.hpp"
#include "levy/wiener.hpp"

namespace fs = std::filesystem;
using levy::cli::run;

namespace {

struct Sandbox {
    fs::path dir;
    Sandbox() {
        dir = fs::temp_directory_path() / ("levy_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    ~Sandbox() { fs::remove_all(dir); }
    std::string file(const std::string& name, const std::string& content) const {
        std::ofstream(dir / name) << content;
        return (dir / name).string();
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

int call(std::vector<std::string> args, std::string* out_text = nullptr) {
    std::ostringstream out, err;
    int rc = run(args, out, err);
    if (out_text) *out_text = out.str();
    return rc;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("time grids") {
    auto lin = levy::cli::parse_time_grid("0.5..2:4");
    REQUIRE(lin.size() == 4);
    CHECK(lin[0] == 0.5);
    CHECK(lin[3] == 2.0);
    CHECK(lin[1] == doctest::Approx(1.0));
    auto geo = levy::cli::parse_time_grid("0.1..10:3:geom");
    REQUIRE(geo.size() == 3);
    CHECK(geo[1] == doctest::Approx(1.0));
    CHECK(levy::cli::parse_time_grid("1,2,3.5").back() == 3.5);
    CHECK(levy::cli::parse_time_grid("2").size() == 1);
    CHECK_THROWS(levy::cli::parse_time_grid("1..x:3"));
    CHECK_THROWS(levy::cli::parse_time_grid("-1"));
}

TEST_CASE("validate") {
    Sandbox s;
    CHECK(call({"validate", s.file("ok.json", R"({"kind":"stable","alpha":1.5,"beta":0})")}) == 0);
    CHECK(call({"validate", s.file("bad.json", "{\"kind\":")}) == 3);
    CHECK(call({"validate", s.file("empty.json", "")}) == 3);
    CHECK(call({"validate", s.file("range.json", R"({"kind":"stable","alpha":2.5,"beta":0})")}) == 2);
    CHECK(call({"validate", s.path("missing.json")}) == 3);
    CHECK(call({"frobnicate"}) == 3);
}

TEST_CASE("kernel dump") {
    Sandbox s;
    std::string text;
    REQUIRE(call({"kernel", s.file("c.json", R"({"kind":"cauchy_kac"})"), "--domain", "-1", "1", "--n", "4"}, &text) == 0);
    bool found = false;
    for (const auto& r : csv_rows(text))
        if (r.size() == 3 && std::stod(r[0]) == 0.0 && std::stod(r[1]) == 0.5) {
            found = true;
            CHECK(std::stod(r[2]) == doctest::Approx(0.65848).epsilon(1e-5));
        }
    CHECK(found);

    std::string w = s.path("w.csv");
    REQUIRE(call({"kernel", s.file("g.json", R"({"kind":"gaussian","A":1})"), "--domain", "-1", "1", "--n", "4", "--out", w}) == 0);
    for (const auto& r : csv_rows(slurp(w))) {
        if (r.size() != 3) continue;
        double x = std::stod(r[0]), y = std::stod(r[1]), v = std::stod(r[2]);
        if (x == 0.0 && y == 0.0) CHECK(v == doctest::Approx(1.0));
        if (x == 1.0) CHECK(v == 0.0);
    }
    CHECK(fs::exists(w + ".manifest.json"));
}

TEST_CASE("spectrum") {
    Sandbox s;
    std::string g = s.file("g.json", R"({"kind":"gaussian","A":1})");
    std::string text;
    REQUIRE(call({"spectrum", g, "--domain", "-1", "1", "--n", "128", "--k", "3"}, &text) == 0);
    auto j = nlohmann::json::parse(text);
    CHECK(j["lambda1"].get<double>() == doctest::Approx(0.8105694691).epsilon(1e-6));
    CHECK(call({"spectrum", g, "--domain", "-1", "1", "--n", "16", "--k", "20"}) == 4);
}

TEST_CASE("survive, compare and rerun") {
    Sandbox s;
    std::string g = s.file("g.json", R"({"kind":"gaussian","A":1})");
    std::string series = s.path("series.csv"), oracle = s.path("oracle.csv"), far = s.path("far.csv");
    REQUIRE(call({"survive", g, "--domain", "-1", "1", "--times", "1..3:3", "--n", "96", "--out", series}) == 0);
    REQUIRE(call({"survive", g, "--domain", "-1", "1", "--times", "1..3:3", "--method", "oracle", "--out", oracle}) == 0);
    auto rows = csv_rows(slurp(oracle));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0][0] == "t");
    CHECK(std::stod(rows[3][1]) == doctest::Approx(levy::wiener::p2(1.0, 1.0, 3.0)).epsilon(1e-12));
    auto srows = csv_rows(slurp(series));
    CHECK(std::abs(std::stod(srows[3][1]) - std::stod(rows[3][1])) < 1e-5);

    CHECK(call({"compare", series + ".manifest.json", oracle + ".manifest.json"}) == 0);
    REQUIRE(call({"survive", g, "--domain", "-1", "1", "--times", "1..3:3", "--method", "oracle", "--out", far}) == 0);
    CHECK(call({"compare"}) == 3);
    CHECK(call({"compare", series + ".manifest.json"}) == 3);

    std::string wide = s.file("wide.json", R"({"kind":"gaussian","A":2})");
    std::string other = s.path("other.csv");
    REQUIRE(call({"survive", wide, "--domain", "-1", "1", "--times", "1..3:3", "--method", "oracle", "--out", other}) == 0);
    CHECK(call({"compare", oracle + ".manifest.json", other + ".manifest.json"}) == 2);
    std::string shifted = s.path("shifted.csv");
    REQUIRE(call({"survive", g, "--domain", "-1", "1", "--times", "1..4:3", "--method", "oracle", "--out", shifted}) == 0);
    CHECK(call({"compare", oracle + ".manifest.json", shifted + ".manifest.json"}) == 4);

    auto man = nlohmann::json::parse(slurp(series + ".manifest.json"));
    CHECK(man["schema"] == levy::cli::kManifestSchema);
    CHECK(man["exit_code"] == 0);
    std::string before = slurp(series);
    fs::remove(series);
    CHECK(call({"rerun", series + ".manifest.json"}) == 0);
    CHECK(slurp(series) == before);

    CHECK(call({"survive", s.file("nig.json", R"({"kind":"nig","C":1,"beta":0.2})"), "--domain", "-1", "1", "--times",
                "1", "--method", "oracle"}) == 4);
}
