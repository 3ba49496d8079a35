#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "xdbn/csv.hpp"
#include "xdbn/dataset.hpp"

using namespace xdbn;

TEST_CASE("csv loads numeric and categorical columns", "[data]") {
    std::istringstream in(
        "age,color,score\n"
        "1,red,0.5\n"
        "2,blue,1.25\n"
        "3,red,-4\n");
    Dataset ds = load_csv(in);
    REQUIRE(ds.n_samples() == 3);
    REQUIRE(ds.n_features() == 3);
    CHECK(ds.schema[0].kind == ColumnKind::Numeric);
    CHECK(ds.schema[1].kind == ColumnKind::Categorical);
    CHECK(ds.schema[1].labels == std::vector<std::string>{"red", "blue"});
    CHECK(ds.features(1, 1) == 1.0);
    CHECK(ds.features(2, 1) == 0.0);
    CHECK(ds.features(1, 2) == 1.25);
}

TEST_CASE("csv rejects missing cells with location", "[data]") {
    std::istringstream in("a,b\n1,2\n3,\n");
    try {
        load_csv(in);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        std::string msg = e.what();
        CHECK(msg.find("row 3") != std::string::npos);
        CHECK(msg.find("'b'") != std::string::npos);
    }
}

TEST_CASE("csv rejects ragged rows and empty input", "[data]") {
    std::istringstream ragged("a,b\n1,2,3\n");
    CHECK_THROWS_AS(load_csv(ragged), DataError);
    std::istringstream empty("");
    CHECK_THROWS_AS(load_csv(empty), DataError);
    std::istringstream headeronly("a,b\n");
    CHECK_THROWS_AS(load_csv(headeronly), DataError);
}

TEST_CASE("csv handles quoted cells", "[data]") {
    std::istringstream in("name,x\n\"a,b\",1\n\"with \"\"quote\"\"\",2\n");
    Dataset ds = load_csv(in);
    CHECK(ds.schema[0].labels == std::vector<std::string>{"a,b", "with \"quote\""});
}

TEST_CASE("csv target extraction", "[data]") {
    std::istringstream in("x,y,label\n1,2,0\n3,4,1\n");
    Dataset ds = load_csv(in, "label");
    CHECK(ds.has_target);
    CHECK(ds.target == std::vector<double>{0.0, 1.0});
    CHECK(ds.n_features() == 2);
    CHECK(ds.target_name == "label");
}

TEST_CASE("dataset round-trips through csv save/load", "[data]") {
    std::istringstream in(
        "num,cat,tgt\n"
        "1.5,alpha,0\n"
        "-2.25,beta,1\n"
        "0.125,alpha,0\n");
    Dataset ds = load_csv(in, "tgt");
    std::ostringstream out;
    save_csv(ds, out);
    std::istringstream back(out.str());
    Dataset ds2 = load_csv(back, "tgt");
    CHECK(ds2.features == ds.features);
    CHECK(ds2.target == ds.target);
    CHECK(ds2.schema[1].labels == ds.schema[1].labels);

    // and byte-stability of a second save
    std::ostringstream out2;
    save_csv(ds2, out2);
    CHECK(out2.str() == out.str());
}

TEST_CASE("dataset validation catches schema breakage", "[data]") {
    Dataset ds;
    ds.features = Matrix(2, 2, 1.0);
    ds.schema = {{"a"}, {"a"}};
    CHECK_THROWS_AS(ds.validate(), DataError);
    ds.schema = {{"a"}};
    CHECK_THROWS_AS(ds.validate(), DataError);
}
