#include <bscript/agreement.hpp>
#include <bscript/resources.hpp>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

#include <cstdio>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace bscript;
using namespace bscript::testing;
using nlohmann::json;

namespace {

struct Run {
    int status = -1;
    std::string out;
    std::string err;
};

/// Runs the CLI with the given arguments, capturing stdout and stderr.
Run cli(const std::string& args, const std::string& tag)
{
    const auto err_path = std::filesystem::temp_directory_path() / ("bscript-cli-" + tag + ".err");
    const std::string cmd = std::string(BSCRIPT_CLI_PATH) + " " + args + " 2>" + err_path.string();
    Run r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0)
        r.out.append(buf, n);
    const int raw = ::pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.err = read_file(err_path);
    return r;
}

std::string fx(const std::string& name)
{
    return std::string(BSCRIPT_FIXTURE_DIR) + "/" + name;
}

/// Column of the row whose first field is `name` in the printed report table.
double table_value(const std::string& out, const std::string& name, int column)
{
    std::istringstream lines(out);
    std::string line;
    while (std::getline(lines, line)) {
        std::istringstream fields(line);
        std::string first;
        fields >> first;
        if (first != name)
            continue;
        double v = 0.0;
        for (int c = 0; c < column; ++c)
            fields >> v;
        return v;
    }
    FAIL("no row " << name);
    return 0.0;
}

}  // namespace

TEST_SUITE("cli")
{
    TEST_CASE("recommend interval on the 30 s fixture")
    {
        const auto r = cli("recommend --source interval --transcript " + fx("talk30.transcript.json"), "rec");
        REQUIRE(r.status == 0);
        const auto recs = json::parse(r.out);
        REQUIRE(recs.size() == 3);
        CHECK(recs[0].at("start_s") == 9.0);
        CHECK(recs[0].at("query") == "passion");
        CHECK(recs[2].at("start_s") == 27.0);
    }

    TEST_CASE("analyze matches the enumeration oracle")
    {
        const auto dir = scratch_dir("cli-analyze");
        write_file_atomic(dir / "talk30.transcript.json", read_file(fx("talk30.transcript.json")));
        const auto r = cli("analyze --trials 500 --seed 3 --edits " + fx("talk30.edits.json") + " --transcripts " +
                               dir.string() + " --out " + (dir / "out").string(),
                           "analyze");
        REQUIRE(r.status == 0);
        const auto report = json::parse(r.out);

        const auto corpus = load_edit_corpus(fx("talk30.edits.json"));
        double mean = 0.0;
        int pairs = 0;
        for (std::size_t i = 0; i < corpus.size(); ++i)
            for (std::size_t j = i + 1; j < corpus.size(); ++j, ++pairs)
                mean += jaccard_oracle(corpus[i], corpus[j], kDefaultBinSeconds, 30.0);
        mean /= pairs;
        CHECK(report.at("expert_jaccard").at("mean").get<double>() == doctest::Approx(mean).epsilon(1e-12));
        CHECK(std::filesystem::exists(dir / "out" / "track_talk30.svg"));
        CHECK(std::filesystem::exists(dir / "out" / "agreement.csv"));

        const auto again = cli("analyze --trials 500 --seed 3 --edits " + fx("talk30.edits.json") + " --transcripts " +
                                   dir.string(),
                               "analyze2");
        CHECK(again.out == r.out);
    }

    TEST_CASE("train on a planted corpus")
    {
        const auto dir = scratch_dir("cli-train");
        const auto corpus = make_planted_corpus();
        write_corpus(dir / "corpus", corpus.transcripts, corpus.edits);
        write_file_atomic(dir / "lexicon.tsv", lexicon_tsv(corpus.valences));
        const std::string common = " --lexicon " + (dir / "lexicon.tsv").string();
        const auto r = cli("train --seed 42 --corpus " + (dir / "corpus").string() + " --labels " +
                               (dir / "corpus" / "edits.json").string() + " --out " + (dir / "model").string() + common,
                           "train");
        REQUIRE(r.status == 0);
        CHECK(table_value(r.out, "pooled", 3) >= 0.9);
        for (const char* f : {"model.json", "feature_space.json", "pr_curve.csv", "pr_curve.svg", "cv_report.json"})
            CHECK(std::filesystem::exists(dir / "model" / f));
        const auto report = json::parse(read_file(dir / "model" / "cv_report.json"));
        CHECK(report.at("folds").size() == 8);

        const auto model_text = read_file(dir / "model" / "model.json");
        const auto second = cli("train --seed 42 --corpus " + (dir / "corpus").string() + " --labels " +
                                    (dir / "corpus" / "edits.json").string() + " --out " + (dir / "model2").string() +
                                    common,
                                "train2");
        REQUIRE(second.status == 0);
        CHECK(read_file(dir / "model2" / "model.json") == model_text);

        const auto ev = cli("evaluate --model " + (dir / "model" / "model.json").string() + " --corpus " +
                                (dir / "corpus").string() + " --labels " + (dir / "corpus" / "edits.json").string() +
                                common,
                            "evaluate");
        REQUIRE(ev.status == 0);
        CHECK(table_value(ev.out, "pooled", 3) >= 0.9);

        const auto rec = cli("recommend --source algorithmic --max 5 --model " + (dir / "model" / "model.json").string() +
                                 " --transcript " + (dir / "corpus" / "planted-0.transcript.json").string() + common,
                             "rec-alg");
        REQUIRE(rec.status == 0);
        const auto recs = json::parse(rec.out);
        CHECK(!recs.empty());
        CHECK(recs.size() <= 5);
        for (const auto& x : recs) {
            CHECK(x.at("source") == "algorithmic");
            CHECK(corpus.truth[0].at(x.at("anchor_word_index").get<std::size_t>()));
        }
    }

    TEST_CASE("export")
    {
        const auto r = cli("export --format csv " + fx("two_insertions.edl.json"), "export");
        REQUIRE(r.status == 0);
        CHECK(r.out == "start_s,duration_s,asset_id,provider,query_origin\n"
                       "8.751,3,gif-chef-kiss,gifs,recommendation:interval-1\n"
                       "14,2.5,stock-office-night,stock,manual\n");
    }

    TEST_CASE("errors are machine readable")
    {
        const auto missing = cli("recommend --source expert --transcript " + fx("talk30.transcript.json"), "err1");
        CHECK(missing.status != 0);
        REQUIRE(missing.err.rfind("error: ", 0) == 0);
        CHECK(json::parse(missing.err.substr(7)).at("code") == "missing_corpus");

        const auto unknown = cli("recommend --frobnicate", "err2");
        CHECK(unknown.status != 0);
        CHECK(json::parse(unknown.err.substr(7)).at("code") == "invalid_argument");

        const auto bad = cli("export --format csv " + fx("talk30.transcript.json"), "err3");
        CHECK(bad.status != 0);
        CHECK(json::parse(bad.err.substr(7)).at("code") == "invalid_document");
    }
}
