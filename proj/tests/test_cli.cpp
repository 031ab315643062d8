#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "facetemb/corpus.hpp"
#include "json.hpp"
#include "support/cli_runner.hpp"
#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"

using namespace facetemb;
using testsupport::CliResult;
using testsupport::make_synthetic_world;
using testsupport::read_file;
using testsupport::run_cli;
using testsupport::SyntheticWorld;
using testsupport::TempDir;

namespace {

struct WorldFiles {
    std::string cp, pf, db, groups;
};

WorldFiles write_world(const SyntheticWorld& world, const TempDir& dir) {
    WorldFiles files;
    std::ostringstream cp, pf, groups;
    write_cp_tsv(world.corpus, cp);
    write_pf_tsv(world.corpus, pf);
    files.cp = dir.write("cp.tsv", cp.str());
    files.pf = dir.write("pf.tsv", pf.str());
    files.db = dir.write("db.tsv", cp.str());  // property DB shares the assertions
    for (const std::string& prop : world.benchmark_properties) {
        std::optional<int> pid = world.db.properties().find(prop);
        const auto& gs = world.db.groups_of(*pid);
        for (std::size_t g = 0; g < gs.size(); ++g)
            for (int c : gs[g])
                groups << prop << '\t' << g << '\t' << world.db.concepts().item(c) << '\n';
    }
    files.groups = dir.write("groups.tsv", groups.str());
    return files;
}

/// One trained model shared by the read-only CLI cases.
struct TrainedFixture {
    TempDir dir;
    SyntheticWorld world = make_synthetic_world(3, 8, 3);
    WorldFiles files = write_world(world, dir);
    std::string model_dir;

    TrainedFixture() {
        model_dir = (dir.path() / "model").string();
        CliResult r = run_cli("train --cp " + files.cp + " --pf " + files.pf +
                              " --dim 16 --hidden 8 --lr 0.03 --batch-size 24 --max-epochs 120"
                              " --patience 120 --neg 3 --pf-neg 8 --val-fraction 0.15"
                              " --seed 5 --out-dir " + model_dir);
        REQUIRE(r.exit_code == 0);
    }

    std::string model() const { return model_dir + "/model.fcsp"; }
};

const TrainedFixture& fixture() {
    static TrainedFixture f;
    return f;
}

}  // namespace

TEST_CASE("ingest pairs writes a normalized corpus and reports counts") {
    TempDir dir;
    std::string cp = dir.write("cp.tsv", "banana\tyellow\nbanana\tyellow\nsea\tblue\n");
    std::string pf = dir.write("pf.tsv", "yellow\tcolour\nblue\tcolour\n");
    std::string out = (dir.path() / "out").string();
    CliResult r = run_cli("ingest pairs --cp " + cp + " --pf " + pf + " --out-dir " + out);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("concepts=2") != std::string::npos);
    CHECK(r.output.find("cp_pairs=2") != std::string::npos);
    CHECK(read_file(out + "/cp.tsv") == "banana\tyellow\nsea\tblue\n");
    CHECK(std::filesystem::exists(out + "/pf.tsv"));
    CHECK(std::filesystem::exists(out + "/manifest_ingest-pairs.json"));
}

TEST_CASE("missing input exits 2 and names the path") {
    TempDir dir;
    CliResult r = run_cli("ingest pairs --cp " + dir.file("nope.tsv"));
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("nope.tsv") != std::string::npos);
}

TEST_CASE("bad flag exits 2 with usage help") {
    CliResult r = run_cli("train --definitely-not-a-flag 1");
    CHECK(r.exit_code == 2);
}

TEST_CASE("ingest conceptnet on a 3-column triple file") {
    TempDir dir;
    std::ostringstream triples;
    for (int i = 0; i < 3; ++i) triples << "head" << i << "\tIsA\ttool\n";
    triples << "boat\tAtLocation\tsea\n";
    std::string input = dir.write("triples.tsv", triples.str());
    std::string out = (dir.path() / "out").string();
    CliResult r = run_cli("ingest conceptnet --input " + input + " --min-tail-count 3 --out-dir " + out);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("properties=1") != std::string::npos);  // "is a tool" survives, "at location sea" does not
    CHECK(read_file(out + "/pf.tsv") == "is a tool\tis a\n");
}

TEST_CASE("train is byte-identical across reruns with one seed") {
    const TrainedFixture& f = fixture();
    TempDir dir;
    std::string out_a = (dir.path() / "a").string();
    std::string out_b = (dir.path() / "b").string();
    std::string args = "train --cp " + f.files.cp + " --pf " + f.files.pf +
                       " --dim 8 --hidden 4 --max-epochs 5 --patience 5 --neg 2 --pf-neg 4"
                       " --val-fraction 0.15 --seed 99 --out-dir ";
    REQUIRE(run_cli(args + out_a).exit_code == 0);
    REQUIRE(run_cli(args + out_b).exit_code == 0);
    CHECK(read_file(out_a + "/model.fcsp") == read_file(out_b + "/model.fcsp"));
    CHECK(read_file(out_a + "/train_report.jsonl") == read_file(out_b + "/train_report.jsonl"));

    // manifests may differ only in wall time
    nlohmann::json ma = nlohmann::json::parse(read_file(out_a + "/manifest_train.json"));
    nlohmann::json mb = nlohmann::json::parse(read_file(out_b + "/manifest_train.json"));
    ma.erase("wall_ms");
    mb.erase("wall_ms");
    // output paths naturally differ by directory; strip them before comparing
    ma.erase("outputs");
    mb.erase("outputs");
    ma["config"].erase("out_dir");
    mb["config"].erase("out_dir");
    CHECK(ma.dump() == mb.dump());
}

TEST_CASE("unsatisfiable outlier construction exits 4") {
    TempDir dir;
    std::ostringstream db, groups;
    db << "knife\tsharp\nscissors\tsharp\nrazor\tsharp\n";
    for (int i = 0; i < 7; ++i) db << "filler" << i << "\tprivate" << i << "\n";
    db << "filler0\tshared\nfiller1\tshared\n";  // only 7 candidates, two collide
    groups << "sharp\t0\tknife\nsharp\t1\tscissors\nsharp\t2\trazor\n";
    std::string db_path = dir.write("db.tsv", db.str());
    std::string groups_path = dir.write("groups.tsv", groups.str());
    CliResult r = run_cli("outlier build --db " + db_path + " --groups " + groups_path +
                          " --properties sharp --n 1 --out-dir " + (dir.path() / "out").string());
    CHECK(r.exit_code == 4);
    CHECK(r.output.find("sharp") != std::string::npos);
}

TEST_CASE("baseline training does not require a pf file") {
    TempDir dir;
    std::string cp = dir.write("cp.tsv", "a\tp0\nb\tp1\nc\tp2\na\tp1\n");
    std::string out = (dir.path() / "out").string();
    CliResult r = run_cli("train --cp " + cp + " --mode baseline --dim 8 --hidden 4"
                          " --max-epochs 3 --patience 3 --neg 1 --val-fraction 0.3 --out-dir " + out);
    CHECK(r.exit_code == 0);
    CHECK(std::filesystem::exists(out + "/model.fcsp"));
}

TEST_CASE("extract against a different corpus exits 3") {
    const TrainedFixture& f = fixture();
    TempDir dir;
    std::string other_cp = dir.write("other_cp.tsv", read_file(f.files.cp) + "extra\tf0 v0\n");
    CliResult r = run_cli("extract --checkpoint " + f.model() + " --cp " + other_cp + " --pf " +
                          f.files.pf + " --k 3 --out-dir " + (dir.path() / "out").string());
    CHECK(r.exit_code == 3);
    CHECK(r.output.find("vocab hash") != std::string::npos);
}

TEST_CASE("extract writes the facet decomposition JSON") {
    const TrainedFixture& f = fixture();
    TempDir dir;
    std::string out = (dir.path() / "out").string();
    CliResult r = run_cli("extract --checkpoint " + f.model() + " --cp " + f.files.cp + " --pf " +
                          f.files.pf + " --k 3 --seed 5 --out-dir " + out);
    CHECK(r.exit_code == 0);
    CHECK(std::filesystem::exists(out + "/facets.json"));
    CHECK(r.output.find("k=3") != std::string::npos);
}

TEST_CASE("cluster mclu emits one rule file per facet") {
    const TrainedFixture& f = fixture();
    TempDir dir;
    std::string out = (dir.path() / "out").string();
    CliResult r = run_cli("cluster --checkpoint " + f.model() + " --cp " + f.files.cp + " --pf " +
                          f.files.pf + " --mode mclu --k 3 --preference 0.7 --format rules"
                          " --seed 5 --out-dir " + out);
    CHECK(r.exit_code == 0);
    int rule_files = 0;
    for (int j = 0; j < 3; ++j)
        if (std::filesystem::exists(out + "/augment_facet" + std::to_string(j) + ".rules")) ++rule_files;
    CHECK(rule_files == 3);
    std::string rules = read_file(out + "/augment_facet0.rules");
    CHECK(rules.find(" SUBCLASS_OF Y_cluster_0_") != std::string::npos);
}

TEST_CASE("cluster runs are byte-identical under one seed") {
    const TrainedFixture& f = fixture();
    TempDir dir;
    std::string args = "cluster --checkpoint " + f.model() + " --cp " + f.files.cp + " --pf " +
                       f.files.pf + " --mode clu --format labels --seed 5 --out-dir ";
    std::string out_a = (dir.path() / "a").string();
    std::string out_b = (dir.path() / "b").string();
    REQUIRE(run_cli(args + out_a).exit_code == 0);
    REQUIRE(run_cli(args + out_b).exit_code == 0);
    CHECK(read_file(out_a + "/augment_clu.labels.tsv") == read_file(out_b + "/augment_clu.labels.tsv"));
}

TEST_CASE("outlier build then run: multi beats or ties single per property") {
    const TrainedFixture& f = fixture();
    TempDir dir;
    std::string bench_dir = (dir.path() / "bench").string();
    CliResult build = run_cli("outlier build --db " + f.files.db + " --groups " + f.files.groups +
                              " --properties 'f1 v0,f1 v1,f2 v0,f2 v1' --n 10 --seed 3"
                              " --out-dir " + bench_dir);
    REQUIRE(build.exit_code == 0);
    CHECK(build.output.find("instances=40") != std::string::npos);

    std::string run_dir = (dir.path() / "run").string();
    CliResult run = run_cli("outlier run --benchmark " + bench_dir + "/benchmark.jsonl" +
                            " --checkpoint " + f.model() + " --cp " + f.files.cp + " --pf " +
                            f.files.pf + " --strategy both --k 3 --seed 5 --threads 2 --out-dir " +
                            run_dir);
    REQUIRE(run.exit_code == 0);
    std::string tsv = read_file(run_dir + "/outlier_results.tsv");
    std::istringstream rows(tsv);
    std::string line;
    std::getline(rows, line);  // header
    int data_rows = 0;
    while (std::getline(rows, line)) {
        std::istringstream cells(line);
        std::string prop, n, single, multi;
        std::getline(cells, prop, '\t');
        std::getline(cells, n, '\t');
        std::getline(cells, single, '\t');
        std::getline(cells, multi, '\t');
        CHECK(std::stod(multi) >= std::stod(single));
        ++data_rows;
    }
    CHECK(data_rows == 5);  // 4 properties + TOTAL
}

TEST_CASE("outlier run is byte-identical under one seed") {
    const TrainedFixture& f = fixture();
    TempDir dir;
    std::string bench_dir = (dir.path() / "bench").string();
    REQUIRE(run_cli("outlier build --db " + f.files.db + " --groups " + f.files.groups +
                    " --properties 'f1 v0' --n 5 --seed 11 --out-dir " + bench_dir)
                .exit_code == 0);
    std::string args = "outlier run --benchmark " + bench_dir + "/benchmark.jsonl --checkpoint " +
                       f.model() + " --cp " + f.files.cp + " --pf " + f.files.pf +
                       " --strategy both --k 3 --seed 5 --out-dir ";
    std::string out_a = (dir.path() / "a").string();
    std::string out_b = (dir.path() / "b").string();
    REQUIRE(run_cli(args + out_a).exit_code == 0);
    REQUIRE(run_cli(args + out_b).exit_code == 0);
    CHECK(read_file(out_a + "/outlier_results.tsv") == read_file(out_b + "/outlier_results.tsv"));
}

TEST_CASE("eval runs a cross-validated split and writes the table") {
    const TrainedFixture& f = fixture();
    TempDir dir;
    // labeled pairs: every cp pair positive, one mismatched pair per concept negative
    std::ostringstream labeled;
    const TrainingCorpus& corpus = f.world.corpus;
    for (auto [c, p] : corpus.cp_pairs.pairs())
        labeled << corpus.concepts.item(c) << '\t' << corpus.properties.item(p) << "\t1\n";
    for (int c = 0; c < corpus.concepts.size(); ++c)
        for (int p = 0; p < corpus.properties.size(); ++p)
            if (!corpus.cp_pairs.contains(c, p)) {
                labeled << corpus.concepts.item(c) << '\t' << corpus.properties.item(p) << "\t0\n";
                break;
            }
    std::string labeled_path = dir.write("labeled.tsv", labeled.str());
    std::string out = (dir.path() / "out").string();
    CliResult r = run_cli("eval --labeled " + labeled_path + " --cp " + f.files.cp + " --pf " +
                          f.files.pf + " --split cpp --folds 2 --mode baseline --lr 0.05"
                          " --batch-size 64 --max-epochs 8 --patience 8 --neg 2 --seed 1"
                          " --out-dir " + out);
    REQUIRE(r.exit_code == 0);
    std::string tsv = read_file(out + "/eval_results.tsv");
    CHECK(tsv.find("cpp\t4\t") != std::string::npos);  // 2x2 grid = 4 partitions

    // without --folds the c+p split defaults to the 3x3 grid
    std::string out3 = (dir.path() / "out3").string();
    CliResult r3 = run_cli("eval --labeled " + labeled_path + " --cp " + f.files.cp + " --pf " +
                           f.files.pf + " --split cpp --mode baseline --lr 0.05"
                           " --batch-size 64 --max-epochs 4 --patience 4 --neg 2 --seed 1"
                           " --out-dir " + out3);
    REQUIRE(r3.exit_code == 0);
    CHECK(read_file(out3 + "/eval_results.tsv").find("cpp\t9\t") != std::string::npos);
}

TEST_CASE("neighbours prints a per-facet report") {
    const TrainedFixture& f = fixture();
    TempDir dir;
    std::string out = (dir.path() / "out").string();
    CliResult r = run_cli("neighbours --checkpoint " + f.model() + " --cp " + f.files.cp + " --pf " +
                          f.files.pf + " --concept c0 --facet -1 --top 3 --k 3 --seed 5"
                          " --out-dir " + out);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("facet 0:") != std::string::npos);
    CHECK(r.output.find("facet 2:") != std::string::npos);
    CHECK(std::filesystem::exists(out + "/neighbours.txt"));

    CliResult unknown = run_cli("neighbours --checkpoint " + f.model() + " --cp " + f.files.cp +
                                " --pf " + f.files.pf + " --concept nosuch --out-dir " + out);
    CHECK(unknown.exit_code == 2);
}

TEST_CASE("config file values apply and flags win") {
    TempDir dir;
    std::string cp = dir.write("cp.tsv", "banana\tyellow\nsea\tblue\n");
    std::string from_config = (dir.path() / "from_config").string();
    std::string config = dir.write("run.cfg", "out-dir=" + from_config + "\n");
    CliResult r = run_cli("ingest pairs --cp " + cp + " --config " + config);
    CHECK(r.exit_code == 0);
    CHECK(std::filesystem::exists(from_config + "/cp.tsv"));

    std::string flag_dir = (dir.path() / "flag_wins").string();
    CliResult r2 = run_cli("ingest pairs --cp " + cp + " --config " + config + " --out-dir " + flag_dir);
    CHECK(r2.exit_code == 0);
    CHECK(std::filesystem::exists(flag_dir + "/cp.tsv"));
}
