#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hvgan/error.hpp"
#include "hvgan/image.hpp"
#include "hvgan/points_csv.hpp"
#include "test_support.hpp"

#include <fstream>
#include <sstream>

using namespace hvgan;
namespace fs = std::filesystem;

namespace {

auto temp_dir() -> fs::path
{
    auto dir = fs::temp_directory_path() / "hvgan_test_data_io";
    fs::create_directories(dir);
    return dir;
}

void write_bytes(const fs::path& p, const std::string& bytes)
{
    std::ofstream out(p, std::ios::binary);
    out << bytes;
}

auto random_image(std::mt19937_64& rng, std::size_t c, std::size_t h, std::size_t w) -> ImageBuffer
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(c * h * w);
    for (auto& x : v) x = u(rng);
    return {c, h, w, v};
}

auto max_abs_diff(const ImageBuffer& a, const ImageBuffer& b) -> double
{
    REQUIRE(a.same_shape(b));
    double m = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

void check_range(const ImageBuffer& img)
{
    for (double v : img.values()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

} // namespace

TEST_CASE("load_image: P5 bytes map to v/255")
{
    const auto path = temp_dir() / "tiny.pgm";
    write_bytes(path, std::string("P5\n2 2\n255\n") + std::string("\x00\xff\x80\x40", 4));
    const auto img = load_image(path);
    CHECK(img.channels() == 1);
    CHECK(img.height() == 2);
    CHECK(img.width() == 2);
    CHECK(img.at(0, 0, 0) == 0.0);
    CHECK(img.at(0, 0, 1) == 1.0);
    CHECK(img.at(0, 1, 0) == doctest::Approx(0.50196078431).epsilon(1e-10));
    CHECK(img.at(0, 1, 1) == doctest::Approx(0.25098039215).epsilon(1e-10));
}

TEST_CASE("load_image: P6 all-zero and header comments")
{
    const auto path = temp_dir() / "zero.ppm";
    write_bytes(path, std::string("P6\n# comment\n3 1\n255\n") + std::string(9, '\0'));
    const auto img = load_image(path);
    CHECK(img.channels() == 3);
    CHECK(img.width() == 3);
    CHECK(img.height() == 1);
    for (double v : img.values()) CHECK(v == 0.0);
}

TEST_CASE("load_image: errors")
{
    const auto dir = temp_dir();
    write_bytes(dir / "bad_magic.pgm", "P2\n1 1\n255\n0");
    write_bytes(dir / "bad_max.pgm", std::string("P5\n1 1\n65535\n") + std::string(2, '\0'));
    write_bytes(dir / "short.pgm", std::string("P5\n4 4\n255\n") + std::string(3, '\0'));
    CHECK_THROWS_AS((void)load_image(dir / "bad_magic.pgm"), ValidationError);
    CHECK_THROWS_AS((void)load_image(dir / "bad_max.pgm"), ValidationError);
    CHECK_THROWS_AS((void)load_image(dir / "short.pgm"), IoError);
    CHECK_THROWS_AS((void)load_image(dir / "missing.pgm"), IoError);
}

TEST_CASE("save_image: round-half-up, round trip and determinism")
{
    const auto dir = temp_dir();
    save_image(ImageBuffer::filled(1, 2, 3, 0.5), dir / "half.pgm");
    std::ifstream in(dir / "half.pgm", std::ios::binary);
    const std::string bytes((std::istreambuf_iterator<char>(in)), {});
    CHECK(bytes.substr(bytes.size() - 6) == std::string(6, '\x80'));

    std::mt19937_64 rng(1);
    for (std::size_t c : {1u, 3u}) {
        const auto img = random_image(rng, c, 5, 7);
        save_image(img, dir / "rt.img");
        const auto back = load_image(dir / "rt.img");
        CHECK(back.same_shape(img));
        CHECK(max_abs_diff(img, back) <= 1.0 / 510.0 + 1e-15);

        save_image(img, dir / "rt2.img");
        std::ifstream a(dir / "rt.img", std::ios::binary), b(dir / "rt2.img", std::ios::binary);
        CHECK(std::string((std::istreambuf_iterator<char>(a)), {}) == std::string((std::istreambuf_iterator<char>(b)), {}));
    }
    CHECK_THROWS_AS(save_image(ImageBuffer::filled(1, 1, 1, 0.0), dir / "no_such_dir" / "x.pgm"), IoError);
}

TEST_CASE("ImageBuffer invariants")
{
    CHECK_THROWS_AS(ImageBuffer(1, 1, 1, {1.5}), ValidationError);
    CHECK_THROWS_AS(ImageBuffer(2, 1, 1, {0.5, 0.5}), ValidationError);
    CHECK_THROWS_AS(ImageBuffer(1, 0, 1, {}), ValidationError);
    CHECK(ImageBuffer::clamped(1, 1, 2, {-3.0, 7.0}).values()[1] == 1.0);
}

TEST_CASE("bicubic kernel weights sum to one at every phase")
{
    for (int i = 0; i <= 1000; ++i) {
        const double x = 3.0 + i / 1000.0;
        const auto w = bicubic_weights(x);
        CHECK(std::abs(w[0] + w[1] + w[2] + w[3] - 1.0) < 1e-12);
    }
    CHECK(keys_kernel(0.0) == 1.0);
    CHECK(keys_kernel(1.0) == 0.0);
    CHECK(keys_kernel(2.0) == 0.0);
    CHECK(keys_kernel(0.5) == 0.5625);
    CHECK(keys_kernel(1.5) == -0.0625);
}

TEST_CASE("bicubic_downscale: examples")
{
    const auto constant = bicubic_downscale(ImageBuffer::filled(1, 8, 12, 0.37));
    CHECK(constant.height() == 2);
    CHECK(constant.width() == 3);
    for (double v : constant.values()) CHECK(v == doctest::Approx(0.37).epsilon(1e-14));

    // Horizontal ramp j/7: the samples sit at x = 1.5 and 5.5.
    std::vector<double> ramp(64);
    for (std::size_t y = 0; y < 8; ++y)
        for (std::size_t x = 0; x < 8; ++x) ramp[y * 8 + x] = x / 7.0;
    const auto down = bicubic_downscale(ImageBuffer(1, 8, 8, ramp));
    for (std::size_t y = 0; y < 2; ++y) {
        CHECK(down.at(0, y, 0) == doctest::Approx(1.5 / 7.0).epsilon(1e-14));
        CHECK(down.at(0, y, 1) == doctest::Approx(5.5 / 7.0).epsilon(1e-14));
    }

    std::mt19937_64 rng(2);
    for (int t = 0; t < 10; ++t) {
        const auto img = random_image(rng, 3, 16, 12);
        CHECK(max_abs_diff(flip_horizontal(bicubic_downscale(img)), bicubic_downscale(flip_horizontal(img))) < 1e-12);
        check_range(bicubic_downscale(img));
    }
    CHECK_THROWS_AS((void)bicubic_downscale(ImageBuffer::filled(1, 6, 8, 0.0)), ValidationError);
}

TEST_CASE("extract_patches")
{
    const auto img = synthetic_image(64, 3);
    CHECK(extract_patches(img, 16, 0, 1).empty());
    const auto a = extract_patches(img, 16, 20, 99, 4);
    const auto b = extract_patches(img, 16, 20, 99, 4);
    REQUIRE(a.size() == 20);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].hr.height() == 4 * a[i].lr.height());
        CHECK(a[i].hr.width() == 4 * a[i].lr.width());
        CHECK(a[i].hr.height() == 16);
        CHECK(a[i].source == 4);
        CHECK(a[i].top == b[i].top);
        CHECK(a[i].left == b[i].left);
        CHECK(a[i].hr == crop(img, a[i].top, a[i].left, 16, 16));
        CHECK(a[i].lr == bicubic_downscale(a[i].hr));
    }
    CHECK_THROWS_AS((void)extract_patches(img, 68, 1, 1), ValidationError);
    CHECK_THROWS_AS((void)extract_patches(img, 18, 1, 1), ValidationError);
}

TEST_CASE("augment")
{
    const auto img = synthetic_image(32, 5);
    const auto pair = extract_patches(img, 16, 1, 3)[0];

    std::uint64_t identity_seed = 0;
    while (true) {
        const auto aug = draw_augmentation(identity_seed);
        if (!aug.flip && aug.quarter_turns == 0) break;
        ++identity_seed;
    }
    const auto same = augment(pair, identity_seed);
    CHECK(same.hr == pair.hr);
    CHECK(same.lr == pair.lr);

    ImageBuffer r = pair.hr;
    for (int i = 0; i < 4; ++i) r = rotate90(r, 1);
    CHECK(r == pair.hr);

    for (std::uint64_t seed = 0; seed < 16; ++seed) {
        const auto out = augment(pair, seed);
        CHECK(max_abs_diff(bicubic_downscale(out.hr), out.lr) < 1e-12);
    }

    PatchPair wide{ImageBuffer::filled(1, 1, 2, 0.0), ImageBuffer::filled(1, 4, 8, 0.0)};
    CHECK_THROWS_AS((void)apply_augmentation(wide, {false, 1}), ValidationError);
    CHECK_NOTHROW((void)apply_augmentation(wide, {true, 2}));
}

TEST_CASE("pipeline keeps values in range")
{
    std::mt19937_64 rng(8);
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto img = synthetic_image(48, s);
        check_range(img);
        for (const auto& p : extract_patches(img, 24, 3, s)) {
            const auto a = augment(p, s);
            check_range(a.lr);
            check_range(a.hr);
        }
    }
    CHECK(synthetic_corpus(3, 16, 1) == synthetic_corpus(3, 16, 1));
}

TEST_CASE("tensor conversion")
{
    const auto a = synthetic_image(8, 1);
    const auto b = synthetic_image(8, 2);
    const std::vector<ImageBuffer> imgs{a, b};
    const auto t = to_tensor(imgs);
    CHECK(t.shape() == Shape{2, 1, 8, 8});
    CHECK(image_from_tensor(t, 1) == b);
    CHECK_THROWS_AS((void)to_tensor(std::vector<ImageBuffer>{a, synthetic_image(4, 1)}), ValidationError);
}

TEST_CASE("read_points_csv: examples")
{
    std::istringstream two("1,2\n2,1\n");
    const auto s = parse_points_csv(two, Orientation::Minimize);
    CHECK(s == hvgan::testing::make_set({{1, 2}, {2, 1}}));

    std::istringstream empty("");
    CHECK(parse_points_csv(empty, Orientation::Minimize).empty());

    std::istringstream ragged("1,2\n3\n");
    try {
        (void)parse_points_csv(ragged, Orientation::Minimize);
        FAIL("expected throw");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }

    std::istringstream junk("1,x\n");
    CHECK_THROWS_AS((void)parse_points_csv(junk, Orientation::Minimize), ValidationError);
    std::istringstream crlf("0.5, 1e-3\r\n\r\n-2,3\r\n");
    CHECK(parse_points_csv(crlf, Orientation::Maximize).size() == 2);
    CHECK_THROWS_AS((void)read_points_csv("/nonexistent/points.csv", Orientation::Minimize), IoError);
    CHECK(parse_number_list("3, 3.5") == std::vector<double>{3, 3.5});
}
