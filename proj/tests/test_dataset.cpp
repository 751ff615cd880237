#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "fedcmfs/dataset.hpp"
#include "fedcmfs/rng.hpp"
#include "fedcmfs/types.hpp"

using namespace fedcmfs;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "fedcmfs_tests";
    fs::create_directories(dir);
    return dir / name;
}

// Flags-shaped discrete CSV: 194 rows, 19 feature columns, 7 trailing labels.
fs::path write_flags_shaped_csv() {
    const fs::path path = temp_file("flags_shaped.csv");
    std::ofstream out(path);
    for (int f = 0; f < 19; ++f) out << "f" << f << ",";
    for (int l = 0; l < 7; ++l) out << "y" << l << (l == 6 ? "" : ",");
    out << "\n";
    Rng rng(11);
    for (int r = 0; r < 194; ++r) {
        for (int f = 0; f < 19; ++f) out << "v" << rng.below(4) << ",";
        for (int l = 0; l < 7; ++l) out << rng.below(2) << (l == 6 ? "" : ",");
        out << "\n";
    }
    return path;
}

} // namespace

TEST_CASE("CSV loading recovers the Flags-shaped dimensions") {
    const fs::path path = write_flags_shaped_csv();
    const MultiLabelDataset ds = load_dataset(path.string(), FileFormat::Csv, 7, DataKind::Discrete);
    CHECK(ds.n_samples() == 194);
    CHECK(ds.n_features() == 19);
    CHECK(ds.n_labels() == 7);
    CHECK(ds.feature_names()[0] == "f0");
    CHECK(ds.label_names()[6] == "y6");
    // Discrete recoding is dense and 0-based.
    for (int32_t v = 0; v < ds.n_features(); ++v) {
        const auto& cats = ds.category_maps()[static_cast<size_t>(v)];
        CHECK(cats.size() >= 1);
        for (int64_t r = 0; r < ds.n_samples(); ++r) {
            const double code = ds.column(v)[r];
            CHECK(code >= 0.0);
            CHECK(code < static_cast<double>(cats.size()));
            CHECK(code == static_cast<double>(static_cast<int64_t>(code)));
        }
    }
}

TEST_CASE("single-row dataset is valid and constant-flagged") {
    const fs::path path = temp_file("one_row.csv");
    {
        std::ofstream out(path);
        out << "f0,y0\n3,0\n";
    }
    const MultiLabelDataset ds = load_dataset(path.string(), FileFormat::Csv, 1, DataKind::Discrete);
    CHECK(ds.n_samples() == 1);
    CHECK(ds.n_features() == 1);
    CHECK(ds.n_labels() == 1);
    CHECK(ds.constant_column(0));
    CHECK(ds.constant_column(1));
}

TEST_CASE("non-binary label value is rejected with the column name") {
    const fs::path path = temp_file("bad_label.csv");
    {
        std::ofstream out(path);
        out << "f0,target_label\n1,0\n2,2\n";
    }
    try {
        load_dataset(path.string(), FileFormat::Csv, 1, DataKind::Discrete);
        FAIL("expected a data error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Data);
        CHECK(std::string(e.what()).find("target_label") != std::string::npos);
    }
}

TEST_CASE("NaN in continuous features is rejected with location") {
    const fs::path path = temp_file("nan_feature.csv");
    {
        std::ofstream out(path);
        out << "f0,f1,y0\n1.0,2.0,1\n1.5,nan,0\n";
    }
    try {
        load_dataset(path.string(), FileFormat::Csv, 1, DataKind::Continuous);
        FAIL("expected a data error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Data);
        CHECK(std::string(e.what()).find("f1") != std::string::npos);
        CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
}

TEST_CASE("ARFF loading honours nominal declarations and MEKA -C markers") {
    const fs::path path = temp_file("tiny.arff");
    {
        std::ofstream out(path);
        out << "@relation 'tiny: -C 2'\n"
            << "@attribute class1 {0,1}\n"
            << "@attribute class2 {0,1}\n"
            << "@attribute size {small,medium,large}\n"
            << "@attribute colour {red,blue}\n"
            << "@data\n"
            << "1,0,large,red\n"
            << "0,1,small,blue\n"
            << "1,1,medium,red\n";
    }
    // -C 2 => two leading label attributes.
    const MultiLabelDataset ds = load_dataset(path.string(), FileFormat::Arff, 0, DataKind::Discrete);
    CHECK(ds.n_labels() == 2);
    CHECK(ds.n_features() == 2);
    CHECK(ds.label_names()[0] == "class1");
    CHECK(ds.feature_names()[0] == "size");
    // Declaration-order coding: large=2, small=0, medium=1.
    CHECK(ds.column(0)[0] == 2.0);
    CHECK(ds.column(0)[1] == 0.0);
    CHECK(ds.column(0)[2] == 1.0);
}

TEST_CASE("ARFF without a -C marker falls back to trailing label columns") {
    const fs::path path = temp_file("trailing.arff");
    {
        std::ofstream out(path);
        out << "@relation trailing\n"
            << "@attribute size numeric\n"
            << "@attribute weight numeric\n"
            << "@attribute tagged {0,1}\n"
            << "@data\n"
            << "0.5,1.5,0\n"
            << "2.0,2.5,1\n";
    }
    const MultiLabelDataset ds = load_dataset(path.string(), FileFormat::Arff, 1, DataKind::Continuous);
    CHECK(ds.n_labels() == 1);
    CHECK(ds.n_features() == 2);
    CHECK(ds.label_names()[0] == "tagged");
}

TEST_CASE("CSV round-trip reproduces the in-memory structure") {
    const fs::path path = write_flags_shaped_csv();
    const MultiLabelDataset ds = load_dataset(path.string(), FileFormat::Csv, 7, DataKind::Discrete);
    const fs::path copy = temp_file("flags_roundtrip.csv");
    save_csv(ds, copy.string());
    const MultiLabelDataset ds2 = load_dataset(copy.string(), FileFormat::Csv, 7, DataKind::Discrete);

    REQUIRE(ds2.n_samples() == ds.n_samples());
    REQUIRE(ds2.n_variables() == ds.n_variables());
    CHECK(ds2.feature_names() == ds.feature_names());
    CHECK(ds2.label_names() == ds.label_names());
    CHECK(ds2.category_maps() == ds.category_maps());
    for (int32_t v = 0; v < ds.n_variables(); ++v)
        for (int64_t r = 0; r < ds.n_samples(); ++r) CHECK(ds2.column(v)[r] == ds.column(v)[r]);

    // Continuous round-trip: shortest-exact formatting must survive reparsing.
    std::vector<double> values{0.1, -3.25, 1e-17, 123456.789012345678, 1.0, 0.0, 1.0, 0.0};
    const MultiLabelDataset cont(DataKind::Continuous, {"a"}, {"y"}, values, 4);
    const fs::path cpath = temp_file("cont_roundtrip.csv");
    save_csv(cont, cpath.string());
    const MultiLabelDataset cont2 = load_dataset(cpath.string(), FileFormat::Csv, 1, DataKind::Continuous);
    for (int32_t v = 0; v < cont.n_variables(); ++v)
        for (int64_t r = 0; r < cont.n_samples(); ++r) CHECK(cont2.column(v)[r] == cont.column(v)[r]);
}

TEST_CASE("partition_clients: sizes, uniqueness, determinism") {
    std::vector<double> values(2 * 100);
    Rng rng(3);
    for (auto& v : values) v = static_cast<double>(rng.below(3));
    for (int i = 100; i < 200; ++i) values[static_cast<size_t>(i)] = static_cast<double>(rng.below(2));
    const MultiLabelDataset ds(DataKind::Discrete, {"f0"}, {"y0"}, values, 100);

    const PartitionPlan plan{3, 0.4, 0.6, 7};
    const auto shards = partition_clients(ds, plan);
    REQUIRE(shards.size() == 3);
    for (const auto& s : shards) {
        CHECK(s.weight == static_cast<int64_t>(s.row_indices.size()));
        CHECK(s.weight >= 40);
        CHECK(s.weight <= 60);
        std::set<int64_t> uniq(s.row_indices.begin(), s.row_indices.end());
        CHECK(uniq.size() == s.row_indices.size());
        for (int64_t r : s.row_indices) {
            CHECK(r >= 0);
            CHECK(r < 100);
        }
    }

    const auto shards2 = partition_clients(ds, plan);
    for (size_t i = 0; i < shards.size(); ++i) CHECK(shards[i].row_indices == shards2[i].row_indices);

    const auto one = partition_clients(ds, PartitionPlan{1, 1.0, 1.0, 5});
    REQUIRE(one.size() == 1);
    CHECK(one[0].weight == 100);

    CHECK_THROWS_AS(partition_clients(ds, PartitionPlan{2, 0.0, 0.5, 1}), Error);
    CHECK_THROWS_AS(partition_clients(ds, PartitionPlan{2, 0.001, 0.003, 1}), Error); // floor(low*s) == 0
}

TEST_CASE("train_test_split: disjoint, exhaustive, deterministic, floored") {
    std::vector<double> values(2 * 10);
    for (int i = 0; i < 10; ++i) {
        values[static_cast<size_t>(i)] = i;
        values[static_cast<size_t>(10 + i)] = i % 2;
    }
    const MultiLabelDataset ds(DataKind::Continuous, {"f0"}, {"y0"}, values, 10);

    auto [train, test] = train_test_split(ds, 0.3, 1);
    CHECK(train.n_samples() == 7);
    CHECK(test.n_samples() == 3);
    std::set<double> seen;
    for (int64_t r = 0; r < train.n_samples(); ++r) seen.insert(train.column(0)[r]);
    for (int64_t r = 0; r < test.n_samples(); ++r) {
        CHECK(!seen.count(test.column(0)[r]));
        seen.insert(test.column(0)[r]);
    }
    CHECK(seen.size() == 10);

    auto [train2, test2] = train_test_split(ds, 0.3, 1);
    for (int64_t r = 0; r < train.n_samples(); ++r) CHECK(train2.column(0)[r] == train.column(0)[r]);

    // Minimum one row per side.
    std::vector<double> two{1.0, 2.0, 0.0, 1.0};
    const MultiLabelDataset tiny(DataKind::Continuous, {"f0"}, {"y0"}, two, 2);
    auto [t1, t2] = train_test_split(tiny, 0.999, 3);
    CHECK(t1.n_samples() == 1);
    CHECK(t2.n_samples() == 1);

    CHECK_THROWS_AS(train_test_split(ds, 0.0, 1), Error);
    CHECK_THROWS_AS(train_test_split(ds, 1.0, 1), Error);
}
