// End-to-end tests of the tabrec binary. The binary path arrives via the
// TABREC_BIN environment variable (set by ctest).

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string binary() {
    const char* bin = std::getenv("TABREC_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "TABREC_BIN must point at the tabrec binary");
    return bin;
}

fs::path work_dir() {
    fs::path dir = fs::temp_directory_path() / "tabrec_cli_tests";
    fs::create_directories(dir);
    return dir;
}

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

RunResult run(const std::string& args) {
    fs::path out_path = work_dir() / "stdout.txt";
    fs::path err_path = work_dir() / "stderr.txt";
    std::string cmd =
        binary() + " " + args + " > " + out_path.string() + " 2> " + err_path.string();
    int status = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_path);
    result.err = slurp(err_path);
    return result;
}

long count_lines(const std::string& text) {
    long n = 0;
    for (char c : text) n += c == '\n';
    return n;
}

} // namespace

TEST_CASE("help and usage errors") {
    CHECK(run("--help").exit_code == 0);
    CHECK(run("evaluate --help").exit_code == 0);
    CHECK(run("synth --help").exit_code == 0);

    CHECK(run("").exit_code == 2);                      // subcommand required
    CHECK(run("evaluate --pred only").exit_code == 2);  // missing --gt
    CHECK(run("frobnicate").exit_code == 2);            // unknown subcommand
    CHECK(run("evaluate --pred a --gt b --bogus").exit_code == 2);
}

TEST_CASE("synth - validate - assemble - evaluate round trip at zero noise") {
    fs::path dir = work_dir();
    fs::path annotations = dir / "ann.jsonl";
    fs::path outputs = dir / "out.jsonl";
    fs::path pred = dir / "pred.jsonl";
    fs::path report = dir / "report.json";

    RunResult synth = run("synth --seed 7 --n 40 --span-prob 0.2 --empty-prob 0.2 "
                          "--annotations-out " + annotations.string() +
                          " --outputs-out " + outputs.string());
    CHECK(synth.exit_code == 0);
    CHECK(count_lines(slurp(annotations)) == 40);
    CHECK(count_lines(slurp(outputs)) == 40);

    CHECK(run("validate --inputs " + outputs.string()).exit_code == 0);

    RunResult assemble =
        run("assemble --outputs " + outputs.string() + " --out " + pred.string());
    CHECK(assemble.exit_code == 0);
    CHECK(count_lines(slurp(pred)) == 40);

    RunResult evaluate = run("evaluate --pred " + pred.string() + " --gt " +
                             annotations.string() + " --out " + report.string());
    CHECK(evaluate.exit_code == 0);
    json doc = json::parse(slurp(report));
    CHECK(doc["mean"] == 1.0);
    CHECK(doc["n"] == 40);
    CHECK(doc["per_sample"].size() == 40);

    // without format correction the bolded header cells no longer match
    fs::path plain = dir / "pred_plain.jsonl";
    CHECK(run("assemble --no-format-correction --outputs " + outputs.string() + " --out " +
              plain.string())
              .exit_code == 0);
    RunResult plain_eval =
        run("evaluate --pred " + plain.string() + " --gt " + annotations.string());
    CHECK(plain_eval.exit_code == 0);
    CHECK(json::parse(plain_eval.out)["mean"] < 1.0);
}

TEST_CASE("evaluate a prediction file against itself") {
    fs::path dir = work_dir();
    fs::path pred = dir / "self.jsonl";
    {
        std::ofstream out(pred);
        out << R"({"filename":"t.png","html":"<table><thead></thead><tbody><tr><td>x</td></tr></tbody></table>"})"
            << "\n";
    }
    RunResult result = run("evaluate --pred " + pred.string() + " --gt " + pred.string());
    CHECK(result.exit_code == 0);
    json doc = json::parse(result.out);
    CHECK(doc["mean"] == 1.0);
}

TEST_CASE("evaluate is deterministic across --jobs") {
    fs::path dir = work_dir();
    fs::path annotations = dir / "j_ann.jsonl";
    fs::path outputs = dir / "j_out.jsonl";
    fs::path pred = dir / "j_pred.jsonl";
    CHECK(run("synth --seed 21 --n 30 --jitter 4 --drop 0.2 --annotations-out " +
              annotations.string() + " --outputs-out " + outputs.string())
              .exit_code == 0);
    CHECK(run("assemble --outputs " + outputs.string() + " --out " + pred.string()).exit_code == 0);
    RunResult serial =
        run("evaluate --jobs 1 --pred " + pred.string() + " --gt " + annotations.string());
    RunResult parallel =
        run("evaluate --jobs 4 --pred " + pred.string() + " --gt " + annotations.string());
    CHECK(serial.exit_code == 0);
    CHECK(serial.out == parallel.out);
}

TEST_CASE("validate flags corrupted token files with exit 1") {
    fs::path dir = work_dir();
    fs::path bad = dir / "bad.jsonl";
    {
        std::ofstream out(bad);
        // "</tr>" with no open row
        out << R"({"filename":"bad.png","structure":{"tokens":["</tr>"],"boxes":[]},"text_lines":[]})"
            << "\n";
    }
    RunResult result = run("validate --inputs " + bad.string());
    CHECK(result.exit_code == 1);
    CHECK(result.out.find("UnbalancedPair") != std::string::npos);
    CHECK(result.out.find("fatal") != std::string::npos);
}

TEST_CASE("synth output is byte-identical for a fixed seed") {
    fs::path dir = work_dir();
    fs::path a1 = dir / "d_a1.jsonl", o1 = dir / "d_o1.jsonl";
    fs::path a2 = dir / "d_a2.jsonl", o2 = dir / "d_o2.jsonl";
    std::string flags = "synth --seed 123 --n 15 --jitter 2 --drop 0.1 ";
    CHECK(run(flags + "--annotations-out " + a1.string() + " --outputs-out " + o1.string())
              .exit_code == 0);
    CHECK(run(flags + "--annotations-out " + a2.string() + " --outputs-out " + o2.string())
              .exit_code == 0);
    CHECK(slurp(a1) == slurp(a2));
    CHECK(slurp(o1) == slurp(o2));
}

TEST_CASE("encode and decode work on annotation files") {
    fs::path dir = work_dir();
    fs::path annotations = dir / "e_ann.jsonl";
    fs::path outputs = dir / "e_out.jsonl";
    fs::path encoded = dir / "e_enc.jsonl";
    fs::path skeletons = dir / "e_skel.jsonl";
    CHECK(run("synth --seed 3 --n 10 --annotations-out " + annotations.string() +
              " --outputs-out " + outputs.string())
              .exit_code == 0);
    CHECK(run("encode --annotations " + annotations.string() + " --out " + encoded.string())
              .exit_code == 0);
    CHECK(count_lines(slurp(encoded)) == 10);
    CHECK(run("validate --inputs " + encoded.string()).exit_code == 0);
    CHECK(run("decode --inputs " + encoded.string() + " --out " + skeletons.string()).exit_code ==
          0);
    std::istringstream lines(slurp(skeletons));
    std::string line;
    long n = 0;
    while (std::getline(lines, line)) {
        json doc = json::parse(line);
        CHECK(doc["html"].get<std::string>().starts_with("<table>"));
        ++n;
    }
    CHECK(n == 10);
}

TEST_CASE("stats reports and regenerates the empty-form table") {
    fs::path dir = work_dir();
    fs::path annotations = dir / "s_ann.jsonl";
    fs::path outputs = dir / "s_out.jsonl";
    fs::path report = dir / "s_report.json";
    fs::path forms = dir / "s_forms.json";
    fs::path vocab = dir / "s_vocab.txt";
    CHECK(run("synth --seed 9 --n 60 --empty-prob 0.4 --annotations-out " + annotations.string() +
              " --outputs-out " + outputs.string())
              .exit_code == 0);

    RunResult stats = run("stats --annotations " + annotations.string() + " --report " +
                          report.string() + " --export-vocab " + vocab.string());
    CHECK(stats.exit_code == 0);
    CHECK(stats.out.find("synth") != std::string::npos);  // human table on stdout
    json doc = json::parse(slurp(report));
    CHECK(doc["total"]["records"] == 60);
    CHECK(count_lines(slurp(vocab)) == 43);

    RunResult derive = run("stats empty-forms --annotations " + annotations.string() + " --out " +
                           forms.string());
    CHECK(derive.exit_code == 0);
    json forms_doc = json::parse(slurp(forms));
    CHECK(forms_doc["forms"].size() == 11);
    CHECK(forms_doc["forms"][0] == "<td></td>");

    // the regenerated table is accepted as input downstream
    CHECK(run("--empty-form-table " + forms.string() + " stats --annotations " +
              annotations.string())
              .exit_code == 0);
}

TEST_CASE("sweep emits one row per grid point") {
    RunResult result = run("sweep --jitter-grid 0,2 --drop-grid 0,0.5 --seeds 5 --jobs 2");
    CHECK(result.exit_code == 0);
    CHECK(count_lines(result.out) == 5);  // header + 4 points
    CHECK(result.out.find("jitter_sigma") == 0);
}

TEST_CASE("assemble takes image sizes from a sidecar file") {
    fs::path dir = work_dir();
    fs::path annotations = dir / "sz_ann.jsonl";
    fs::path outputs = dir / "sz_out.jsonl";
    fs::path stripped = dir / "sz_stripped.jsonl";
    fs::path sizes = dir / "sz_sizes.jsonl";
    fs::path pred = dir / "sz_pred.jsonl";
    CHECK(run("synth --seed 51 --n 12 --annotations-out " + annotations.string() +
              " --outputs-out " + outputs.string())
              .exit_code == 0);

    // strip the embedded image_size and move it into a sidecar
    {
        std::ifstream in(outputs);
        std::ofstream out(stripped), size_out(sizes);
        std::string line;
        while (std::getline(in, line)) {
            json doc = json::parse(line);
            json size_line{{"filename", doc["filename"]},
                           {"width", doc["image_size"][0]},
                           {"height", doc["image_size"][1]}};
            size_out << size_line.dump() << "\n";
            doc.erase("image_size");
            out << doc.dump() << "\n";
        }
    }

    // without sizes the samples with text lines fall back to empty tables
    RunResult no_sizes = run("assemble --outputs " + stripped.string() + " --out " + pred.string());
    CHECK(no_sizes.exit_code == 0);
    CHECK(no_sizes.err.find("image_size") != std::string::npos);

    RunResult with_sizes = run("assemble --outputs " + stripped.string() + " --sizes " +
                               sizes.string() + " --out " + pred.string());
    CHECK(with_sizes.exit_code == 0);
    RunResult evaluate =
        run("evaluate --pred " + pred.string() + " --gt " + annotations.string());
    CHECK(evaluate.exit_code == 0);
    CHECK(json::parse(evaluate.out)["mean"] == 1.0);
}

TEST_CASE("config file supplies long-option defaults") {
    fs::path dir = work_dir();
    fs::path config = dir / "tabrec.toml";
    fs::path pred = dir / "cfg_pred.jsonl";
    {
        std::ofstream out(config);
        out << "quiet=true\n\n[sweep]\nseeds=3\njitter-grid=0\ndrop-grid=0\n";
    }
    {
        std::ofstream out(pred);
        out << R"({"filename":"t.png","html":"<table><thead></thead><tbody></tbody></table>"})"
            << "\n";
    }
    RunResult result = run("--config " + config.string() + " sweep");
    CHECK(result.exit_code == 0);
    CHECK(count_lines(result.out) == 2);     // header + the single configured point
    CHECK(result.err.empty());               // quiet=true silenced the log line

    // same via the environment variable
    fs::path out_path = work_dir() / "stdout.txt";
    fs::path err_path = work_dir() / "stderr.txt";
    std::string cmd = "TABREC_CONFIG=" + config.string() + " " + binary() + " sweep > " +
                      out_path.string() + " 2> " + err_path.string();
    int status = std::system(cmd.c_str());
    CHECK(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(count_lines(slurp(out_path)) == 2);
}
