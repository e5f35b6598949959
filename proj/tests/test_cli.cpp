#include <doctest.h>

#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Scratch {
    fs::path dir = fs::temp_directory_path() / ("slowent_cli_" + std::to_string(::getpid()));
    Scratch() {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
};

fs::path scratch() {
    static const Scratch s;
    return s.dir;
}

fs::path write_config(const std::string& name, const json& j) {
    const fs::path p = scratch() / (name + ".json");
    std::ofstream(p) << j.dump(2);
    return p;
}

int run(const std::string& args, std::string* err = nullptr) {
    const fs::path errf = scratch() / "stderr.txt";
    const std::string cmd = std::string(SLOWENT_BIN) + " " + args + " >/dev/null 2>" + errf.string();
    const int st = std::system(cmd.c_str());
    if (err) {
        std::ifstream in(errf);
        std::stringstream ss;
        ss << in.rdbuf();
        *err = ss.str();
    }
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json sample_words_config() {
    return {{"schema", 1},
            {"experiment", "sample-words"},
            {"seed", 3},
            {"params",
             {{"sigma", 4}, {"k", 40}, {"N", 4}, {"eps", "1/10"}, {"gamma", "1/5"},
              {"b", {{"kind", "polynomial"}, {"exponent", "2"}}}}}};
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(run("") == 2);
    CHECK(run("no-such-experiment --config x.json") == 2);
    CHECK(run("sample-words") == 2);

    auto cfg = sample_words_config();
    cfg["params"]["unexpected"] = 1;
    std::string err;
    CHECK(run("sample-words --config " + write_config("unknown", cfg).string() + " --out " +
                  (scratch() / "o1").string(),
              &err) == 2);
    const json e = json::parse(err);
    CHECK(e.at("error").at("kind") == "config");
    CHECK(e.at("error").at("experiment") == "sample-words");

    cfg = sample_words_config();
    cfg.erase("seed");
    CHECK(run("sample-words --config " + write_config("noseed", cfg).string() + " --out " +
              (scratch() / "o2").string()) == 2);

    std::ofstream(scratch() / "broken.json") << "{ not json";
    CHECK(run("sample-words --config " + (scratch() / "broken.json").string()) == 2);
}

TEST_CASE("pipeline errors exit with 1") {
    auto cfg = sample_words_config();
    cfg["params"]["k"] = 4;
    cfg["params"]["N"] = 500;
    cfg["params"]["b"]["exponent"] = "5";
    std::string err;
    CHECK(run("sample-words --config " + write_config("pigeon", cfg).string() + " --out " +
                  (scratch() / "o3").string(),
              &err) == 1);
    CHECK(json::parse(err).at("error").at("kind") == "pipeline");
}

TEST_CASE("reruns are byte-identical and the manifest hashes match") {
    const fs::path cfg = write_config("ok", sample_words_config());
    const fs::path a = scratch() / "a", b = scratch() / "b";
    REQUIRE(run("sample-words --config " + cfg.string() + " --out " + a.string()) == 0);
    REQUIRE(run("sample-words --config " + cfg.string() + " --out " + b.string() + " --threads 3") == 0);
    for (const char* f : {"words.txt", "collection.json", "manifest.json"}) {
        CAPTURE(f);
        REQUIRE(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    const json m = json::parse(slurp(a / "manifest.json"));
    CHECK(m.at("seed") == 3);
    CHECK(m.at("experiment") == "sample-words");
    CHECK(m.at("artifacts").size() == 2);

    // A different seed on the command line changes the words.
    const fs::path c = scratch() / "c";
    REQUIRE(run("sample-words --config " + cfg.string() + " --out " + c.string() + " --seed 4") == 0);
    CHECK(slurp(a / "words.txt") != slurp(c / "words.txt"));
}
