#include <gtest/gtest.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "curvtomo/io/config.hpp"
#include "curvtomo/io/experiment.hpp"
#include "curvtomo/io/formats.hpp"

using namespace curvtomo;

namespace {

std::uint64_t fnv_of(const std::string& s) {
    return fnv1a(reinterpret_cast<const unsigned char*>(s.data()), s.size());
}

GridImage sample_image() {
    GridImage img(SpatialGrid(Box{-1.0, 1.0, -0.5, 0.75}, 5, 3));
    for (std::size_t k = 0; k < img.values.size(); ++k) img.values[k] = std::sin(1.0 + 0.37 * static_cast<double>(k)) / 3.0;
    return img;
}

BoundarySinogram sample_sinogram(const Geometry& geo) {
    BoundarySinogram s(boundary_measure_nodes(geo.outer(), geo.shell, 6, 4), 6, 4);
    for (std::size_t q = 0; q < s.size(); ++q) s.values[q] = 0.1 * static_cast<double>(q) - 1.0 / 3.0;
    return s;
}

Geometry small_geometry() {
    const Domain2 d = Domain2::ball(Vec2{}, 0.75).with_enclosing(Domain2::ball(Vec2{}, 1.0));
    return Geometry{d, EnergyShell2(0.5, ForceField2::constant_magnetic(0.2), d.outermost()), {}};
}

std::string error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Checksum, KnownFnv1aVectors) {
    EXPECT_EQ(fnv_of(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv_of("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(fnv_of("foobar"), 0x85944171f73967e8ULL);
}

TEST(GridImageFile, RoundTripIsExact) {
    const GridImage img = sample_image();
    const auto bytes = encode_grid_image(img);
    EXPECT_EQ(bytes.size(), 4u + 8u + 32u + 8u * 15u + 8u);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "CTG1");
    // little-endian dimensions
    EXPECT_EQ(bytes[4], 5);
    EXPECT_EQ(bytes[8], 3);
    const GridImage back = decode_grid_image(bytes);
    EXPECT_TRUE(back.grid == img.grid);
    EXPECT_EQ(back.values, img.values);
}

TEST(GridImageFile, ChecksumCoversPayload) {
    const auto bytes = encode_grid_image(sample_image());
    std::uint64_t stored = 0;
    for (int i = 0; i < 8; ++i) stored |= static_cast<std::uint64_t>(bytes[bytes.size() - 8 + i]) << (8 * i);
    EXPECT_EQ(stored, fnv1a(bytes.data() + 44, 8 * 15));
}

TEST(GridImageFile, CorruptionIsRejected) {
    const auto good = encode_grid_image(sample_image());
    auto flipped = good;
    flipped[50] ^= 0x01;
    EXPECT_NE(error_of([&] { decode_grid_image(flipped); }).find("checksum"), std::string::npos);
    auto magic = good;
    magic[3] = '2';
    EXPECT_NE(error_of([&] { decode_grid_image(magic); }).find("magic"), std::string::npos);
    auto truncated = good;
    truncated.resize(good.size() - 9);
    EXPECT_THROW(decode_grid_image(truncated), FormatError);
    auto dims = good;
    dims[4] = 6;
    EXPECT_NE(error_of([&] { decode_grid_image(dims); }).find("dimensions"), std::string::npos);
    EXPECT_THROW(decode_grid_image(std::vector<unsigned char>{'C', 'T'}), FormatError);
}

TEST(SinogramFile, RoundTripAndNodeValidation) {
    const Geometry geo = small_geometry();
    const BoundarySinogram s = sample_sinogram(geo);
    const auto bytes = encode_sinogram(sinogram_records(s));
    EXPECT_EQ(bytes.size(), 4u + 4u + 32u * s.size() + 8u);
    const auto recs = decode_sinogram(bytes);
    const BoundarySinogram back = attach_sinogram(recs, s.zeros_like());
    EXPECT_EQ(back.values, s.values);
    for (std::size_t q = 0; q < s.size(); ++q) EXPECT_EQ(recs[q].angle, s.nodes[q].direction_angle());

    // Another node set: count mismatch and coordinate mismatch.
    const BoundarySinogram other(boundary_measure_nodes(geo.outer(), geo.shell, 8, 3), 8, 3);
    EXPECT_THROW(attach_sinogram(recs, other), FormatError);
    auto moved = recs;
    moved[5].angle += 1e-3;
    EXPECT_NE(error_of([&] { attach_sinogram(moved, s); }).find("node 5"), std::string::npos);

    auto bad = bytes;
    bad[20] ^= 0x10;
    EXPECT_NE(error_of([&] { decode_sinogram(bad); }).find("checksum"), std::string::npos);
    auto count = bytes;
    count[4] = static_cast<unsigned char>(count[4] + 1);
    EXPECT_THROW(decode_sinogram(count), FormatError);
}

TEST(Csv, HeaderLineEndingsAndFullPrecision) {
    const GridImage img = sample_image();
    const std::string csv = grid_image_csv(img);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "i,j,x,y,value");
    EXPECT_EQ(csv.find('\r'), std::string::npos);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    for (std::size_t k = 0; std::getline(in, line); ++k) {
        const double v = std::strtod(line.substr(line.rfind(',') + 1).c_str(), nullptr);
        EXPECT_EQ(v, img.values[k]);
    }
    const std::string sino = sinogram_csv(sample_sinogram(small_geometry()));
    EXPECT_EQ(sino.substr(0, sino.find('\n')), "position,direction,arc_length,angle,weight,value");
    EXPECT_EQ(residual_csv({1.0, 0.5}, {2.0, 0.25}), "iteration,residual,normal_residual\n0,1,2\n1,0.5,0.25\n");
}

TEST(Config, RoundTripIsIdempotent) {
    ExperimentConfig c;
    EXPECT_EQ(parse_config(serialize_config(c)), c);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    c.force_kind = "bump-magnetic";
    c.force_b = u(rng);
    c.tau = 1.0 / 3.0;
    c.kappa2.by = u(rng);
    c.outer.center_x = u(rng) * 1e-300;
    c.grid_nx = 33;
    c.seed = 18446744073709551615ULL;
    c.sigma_file = "maps/sigma.ctg";
    const std::string once = serialize_config(c);
    const ExperimentConfig back = parse_config(once);
    EXPECT_EQ(back, c);
    EXPECT_EQ(serialize_config(back), once);
}

TEST(Config, SerializationIsSortedAndComplete) {
    const std::string s = serialize_config(ExperimentConfig{});
    std::istringstream in(s);
    std::string line, prev;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        const std::string key = line.substr(0, line.find('='));
        EXPECT_LT(prev, key);
        prev = key;
        ++n;
    }
    EXPECT_EQ(n, config_keys().size());
}

TEST(Config, CommentsBlanksAndPartialFiles) {
    const auto c = parse_config("# header\n\n  force.kind = magnetic  # inline\nforce.b=0.25\r\n");
    EXPECT_EQ(c.force_kind, "magnetic");
    EXPECT_EQ(c.force_b, 0.25);
    EXPECT_EQ(c.tau, ExperimentConfig{}.tau);
}

TEST(Config, ErrorsCarryLineNumbers) {
    EXPECT_NE(error_of([] { parse_config("tau=1\nnot.a.key=3\n", "x.cfg"); }).find("x.cfg:2: unknown key 'not.a.key'"),
              std::string::npos);
    EXPECT_NE(error_of([] { parse_config("\n\ngrid.nx=abc\n"); }).find(":3:"), std::string::npos);
    EXPECT_NE(error_of([] { parse_config("grid.nx=-4\n"); }).find("non-negative integer"), std::string::npos);
    EXPECT_NE(error_of([] { parse_config("tau 1\n"); }).find(":1: expected key=value"), std::string::npos);
    EXPECT_NE(error_of([] { parse_config("tau=1\ntau=2\n"); }).find(":2: duplicate"), std::string::npos);
    EXPECT_THROW(parse_config("tau=1.5x\n"), FormatError);
    EXPECT_THROW(load_config("/nonexistent/file.cfg"), FormatError);
}

TEST(ConfigValidation, EnergyLevelBelowPotentialMaximum) {
    ExperimentConfig c;
    c.force_kind = "gaussian-bump";
    c.force_amplitude = 0.8;
    c.force_width = 0.5;
    c.tau = 0.5;
    EXPECT_THROW(validate_config(c), DomainError);
    c.tau = 0.81;
    EXPECT_NO_THROW(validate_config(c));
}

TEST(ConfigValidation, DomainMustSitStrictlyInsideOuter) {
    ExperimentConfig c;
    c.domain.radius = 1.0;
    EXPECT_THROW(validate_config(c), DomainError);
    c.domain.radius = 0.5;
    c.domain.center_x = 0.6;
    EXPECT_THROW(validate_config(c), DomainError);
    c.domain.center_x = 0.4;
    EXPECT_NO_THROW(validate_config(c));
}

TEST(ConfigValidation, RejectsUnknownKindsAndBadSizes) {
    auto bad = [](auto mutate) {
        ExperimentConfig c;
        mutate(c);
        return error_of([&] { validate_config(c); });
    };
    EXPECT_NE(bad([](ExperimentConfig& c) { c.force_kind = "electric"; }).find("force.kind"), std::string::npos);
    EXPECT_NE(bad([](ExperimentConfig& c) { c.sigma_kind = "random"; }).find("sigma.kind"), std::string::npos);
    EXPECT_NE(bad([](ExperimentConfig& c) { c.scatter_kind = "general"; }).find("scatter.kind"), std::string::npos);
    EXPECT_NE(bad([](ExperimentConfig& c) { c.grid_ntheta = 7; }).find("grid.ntheta"), std::string::npos);
    EXPECT_NE(bad([](ExperimentConfig& c) { c.recon_method = "art"; }).find("recon.method"), std::string::npos);
    EXPECT_NE(bad([](ExperimentConfig& c) { c.boundary_rule = "simpson"; }).find("boundary.rule"), std::string::npos);
    EXPECT_NE(bad([](ExperimentConfig& c) { c.force_kind = "grid"; }).find("potential_file"), std::string::npos);
}

TEST(ConfigValidation, GridForceFromImageFiles) {
    const auto dir = std::filesystem::temp_directory_path() / "curvtomo_io_grid_force";
    std::filesystem::create_directories(dir);
    GridImage phi(SpatialGrid(Box{-1.2, 1.2, -1.2, 1.2}, 25, 25));
    for (std::size_t k = 0; k < phi.values.size(); ++k) {
        const Vec2 x = phi.grid.center(k);
        phi.values[k] = 0.1 * dot(x, x);
    }
    write_grid_image((dir / "phi.ctg").string(), phi);
    ExperimentConfig c;
    c.force_kind = "grid";
    c.force_potential_file = "phi.ctg";
    c.tau = 0.5;
    const Geometry geo = validate_config(c, dir);
    EXPECT_NEAR(geo.force().potential(Vec2{{0.3, 0.2}}), 0.1 * 0.13, 1e-6);
    c.tau = 0.05;
    EXPECT_THROW(validate_config(c, dir), DomainError);
    std::filesystem::remove_all(dir);
}

TEST(Experiment, BuildsOperatorsFromConfig) {
    ExperimentConfig c;
    c.grid_nx = c.grid_ny = 12;
    c.grid_ntheta = 8;
    c.boundary_positions = 16;
    c.boundary_directions = 8;
    c.sigma_kind = "constant";
    c.sigma_mu = 0.2;
    Experiment e(c);
    EXPECT_EQ(e.ray().nodes().size(), 128u);
    EXPECT_TRUE(e.grid() == e.phase_grid().spatial());
    EXPECT_EQ(e.setup().model->data_size(), 128u);
    EXPECT_FALSE(e.measurement().has_scattering());

    c.scatter_kind = "separable";
    c.scatter_lambda = 0.05;
    c.kappa1.ax = 0.5;
    Experiment s(c);
    EXPECT_TRUE(s.kernel().is_separable());
    EXPECT_NEAR(s.kernel()(Vec2{{0.4, 0.0}}, Vec2{{1.0, 0.0}}, Vec2{{0.0, 1.0}}), 0.05 * 1.2, 1e-15);
    EXPECT_TRUE(s.measurement().has_scattering());
}

TEST(Experiment, SampleConfigsLoad) {
    const std::filesystem::path dir = CURVTOMO_CONFIG_DIR;
    for (const char* name : {"default.cfg", "weak-magnetic.cfg", "strong-magnetic.cfg", "scattering.cfg"}) {
        const ExperimentConfig c = load_config((dir / name).string());
        EXPECT_NO_THROW(validate_config(c, dir)) << name;
        EXPECT_EQ(parse_config(serialize_config(c)), c) << name;
    }
    EXPECT_THROW(validate_config(load_config((dir / "bad-tau.cfg").string()), dir), DomainError);
}
