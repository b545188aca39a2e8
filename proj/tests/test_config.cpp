#include "on2vec/config.hpp"
#include "on2vec/errors.hpp"

#include <doctest.h>

#include <sstream>

using namespace on2vec;

namespace {

RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_run_config(in, "run.cfg");
}

} // namespace

TEST_CASE("profile presets") {
    const auto cfg = parse("profile=cn30k\n");
    CHECK(cfg.train.gamma1 == 0.5);
    CHECK(cfg.train.k == 50);
    CHECK(cfg.train.norm == NormOrder::l2);

    const auto db = parse("profile=db3.6k\n");
    CHECK(db.train.k == 25);
    CHECK(db.train.gamma1 == 2.0);
    CHECK(db.train.norm == NormOrder::l1);
}

TEST_CASE("explicit keys override the profile wherever it appears") {
    const auto before = parse("k=10\nprofile=cn30k\n");
    const auto after = parse("profile=cn30k\nk=10\n");
    CHECK(before.train.k == 10);
    CHECK(after.train.k == 10);
    CHECK(after.train.gamma1 == 0.5);
    CHECK(after.train.lambda == 0.001);
}

TEST_CASE("bad settings are rejected with their line") {
    CHECK_THROWS_AS(parse("alpha2=1.5\n"), InputError);
    CHECK_THROWS_AS(parse("alpha2=0\n"), InputError);
    CHECK_NOTHROW(parse("alpha2=1\n"));
    try {
        parse("k=5\n# note\nk=6\n");
        FAIL("expected an error");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("run.cfg:3") != std::string::npos);
        CHECK(std::string(e.what()).find("repeated") != std::string::npos);
    }
    CHECK_THROWS_AS(parse("colour=blue\n"), InputError);
    CHECK_THROWS_AS(parse("k=ten\n"), InputError);
    CHECK_THROWS_AS(parse("profile=huge\n"), InputError);
    CHECK_THROWS_AS(parse("threads=0\n"), InputError);
}

TEST_CASE("config text round trip") {
    const auto cfg = parse(
        "profile=desk\nk=12\ngamma2=0.3\nalpha1=0\nvariant=transr\nnorm=l1\nseed=18446744073709551615\n"
        "batch_size=7\nthreads=3\ntrain=data/train.tsv\ncheckpoint=out/model.ckpt\n");
    const auto text = format_run_config(cfg);
    const auto back = parse(text);
    CHECK(back == cfg);
    CHECK(format_run_config(back) == text);
    CHECK(back.train.seed == 18446744073709551615ull);
}

TEST_CASE("every profile validates") {
    for (const auto& name : profile_names()) {
        TrainConfig cfg;
        apply_profile(name, cfg);
        CHECK_NOTHROW(cfg.validate());
    }
}
