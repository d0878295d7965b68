#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cpseg/grid.hpp"
#include "cpseg/image_io.hpp"
#include "cpseg/rng.hpp"
#include "oracles.hpp"

using namespace cpseg;
namespace fs = std::filesystem;

namespace {
fs::path tmpdir() {
    fs::path p = fs::temp_directory_path() / "cpseg_grid_tests";
    fs::create_directories(p);
    return p;
}
} // namespace

TEST_CASE("threshold is strict and monotone") {
    ProbabilityMap p(1, 2);
    p.values = {0.4f, 0.6f};
    BinaryMask m = threshold(p, 0.5);
    CHECK_FALSE(m.get(0, 0));
    CHECK(m.get(0, 1));

    ProbabilityMap zeros(4, 4, 0.0f);
    CHECK(threshold(zeros, 0.0).empty_fg()); // 0 > 0 is false

    ProbabilityMap ones(4, 4, 1.0f);
    CHECK(threshold(ones, 1.0).empty_fg());

    // monotone: higher tau yields a subset
    Rng rng(7);
    ProbabilityMap rand = oracle::random_prob(rng, 12, 12, 0.0, 1.0);
    BinaryMask lo = threshold(rand, 0.3);
    BinaryMask hi = threshold(rand, 0.7);
    for (size_t i = 0; i < lo.size(); ++i)
        if (hi.bits[i]) CHECK(lo.bits[i]);
}

TEST_CASE("mask PNG round trip") {
    fs::path dir = tmpdir();

    SUBCASE("all-zero 4x4") {
        BinaryMask m(4, 4);
        std::string path = (dir / "zero.png").string();
        save_mask(m, path);
        CHECK(load_mask(path).count() == 0);
    }

    SUBCASE("single pixel and 1x1") {
        BinaryMask m(5, 7);
        m.set(2, 3);
        std::string path = (dir / "one.png").string();
        save_mask(m, path);
        BinaryMask back = load_mask(path);
        CHECK(back == m);

        BinaryMask tiny(1, 1, true);
        save_mask(tiny, (dir / "tiny.png").string());
        CHECK(load_mask((dir / "tiny.png").string()) == tiny);
    }

    SUBCASE("seeded random masks round-trip bit-exactly") {
        Rng rng(42);
        for (int trial = 0; trial < 20; ++trial) {
            BinaryMask m = oracle::random_mask(rng, 16, 16, 0.4);
            std::string path = (dir / "rand.png").string();
            save_mask(m, path);
            CHECK(load_mask(path) == m);
        }
    }

    SUBCASE("foreground cutoff at 128") {
        // write a 1x2 gray PNG with values 127 and 128 via ProbabilityMap
        ProbabilityMap g(1, 2);
        g.values = {127.0f / 255.0f, 128.0f / 255.0f};
        std::string path = (dir / "cutoff.png").string();
        save_gray(g, path);
        BinaryMask m = load_mask(path);
        CHECK_FALSE(m.get(0, 0));
        CHECK(m.get(0, 1));
    }

    SUBCASE("missing file") {
        CHECK_THROWS(load_mask((dir / "nope.png").string()));
    }
}

TEST_CASE("CPLR format") {
    fs::path dir = tmpdir();

    SUBCASE("header arithmetic for 2x2") {
        ProbabilityMap p(2, 2, 0.5f);
        std::string path = (dir / "half.cplr").string();
        save_prob(p, path);
        CHECK(fs::file_size(path) == 12 + 16);
        CHECK(load_prob(path) == p);
    }

    SUBCASE("random maps round-trip bit-exactly") {
        Rng rng(3);
        for (int trial = 0; trial < 20; ++trial) {
            ProbabilityMap p = oracle::random_prob(rng, 9, 13, 0.0, 1.0);
            std::string path = (dir / "rand.cplr").string();
            save_prob(p, path);
            CHECK(load_prob(path) == p);
        }
    }

    SUBCASE("bad magic") {
        std::string path = (dir / "bad.cplr").string();
        std::ofstream(path, std::ios::binary) << "NOPE\x02\x00\x00\x00\x02\x00\x00\x00";
        CHECK_THROWS(load_prob(path));
    }

    SUBCASE("zero height") {
        std::string path = (dir / "zeroh.cplr").string();
        std::ofstream out(path, std::ios::binary);
        out << "CPLR";
        uint8_t zeros[8] = {0, 0, 0, 0, 2, 0, 0, 0};
        out.write(reinterpret_cast<char*>(zeros), 8);
        out.close();
        CHECK_THROWS(load_prob(path));
    }

    SUBCASE("truncated payload") {
        ProbabilityMap p(4, 4, 0.25f);
        std::string path = (dir / "trunc.cplr").string();
        save_prob(p, path);
        fs::resize_file(path, 12 + 8);
        CHECK_THROWS(load_prob(path));
    }
}
