#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "coinccl/errors.hpp"
#include "coinccl/io.hpp"

using namespace coinccl;

namespace {

std::string tmp_path(const std::string& name) {
  static const std::filesystem::path dir = [] {
    auto d = std::filesystem::temp_directory_path() / "coinccl-io-tests";
    std::filesystem::create_directories(d);
    return d;
  }();
  return (dir / name).string();
}

Matrix sample_matrix() {
  Matrix m(3, 4);
  const double vals[12] = {0.1,     -1.0 / 3.0, 1e-300, 1.7976931348623157e308,
                           0.0,     42.0,       -2.5e-17, 3.14159265358979312,
                           5e-324,  -7.25,      1e6,     -0.001953125};
  for (std::size_t i = 0; i < 12; ++i)
    m.data()[i] = vals[i];
  return m;
}

MatrixMeta sample_meta() {
  MatrixMeta meta;
  meta.row_axis = "energy_eV";
  meta.col_axis = "q_per_nm";
  meta.units = "1/(eV nm)";
  meta.row_values = {0.5, 1.5, 2.5};
  meta.col_values = {0.0, 0.01, 0.02, 0.03};
  meta.config_hash = 0x123456789abcdef0ull;
  return meta;
}

void check_meta_equal(const MatrixMeta& a, const MatrixMeta& b) {
  CHECK(a.row_axis == b.row_axis);
  CHECK(a.col_axis == b.col_axis);
  CHECK(a.units == b.units);
  CHECK(a.row_values == b.row_values);
  CHECK(a.col_values == b.col_values);
  CHECK(a.config_hash == b.config_hash);
}

}  // namespace

TEST_CASE("fnv1a and hash_hex are stable") {
  CHECK(fnv1a("") == 14695981039346656037ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
  CHECK(hash_hex(0) == "0000000000000000");
  CHECK(hash_hex(0xdeadbeefull) == "00000000deadbeef");
  CHECK(hash_hex(fnv1a("a")) == "af63dc4c8601ec8c");
  CHECK(fnv1a("ab") != fnv1a("ba"));
}

TEST_CASE("text matrix round-trips exactly") {
  const std::string path = tmp_path("m.txt");
  const Matrix m = sample_matrix();
  const MatrixMeta meta = sample_meta();
  write_matrix_text(path, m, meta);

  MatrixMeta back;
  const Matrix r = read_matrix_text(path, &back);
  CHECK(r == m);
  check_meta_equal(back, meta);
}

TEST_CASE("text matrix header validation") {
  SUBCASE("missing format line") {
    const std::string path = tmp_path("bad_header.txt");
    write_text_file(path, "# not-a-matrix\n1 2\n");
    try {
      read_matrix_text(path);
      FAIL("expected parse_error");
    } catch (const parse_error& e) {
      CHECK(e.path == path);
      CHECK(e.line == 1);
    }
  }
  SUBCASE("wrong column count points at the offending line") {
    const std::string path = tmp_path("bad_cols.txt");
    write_text_file(path,
                    "# coinccl-matrix v1\n# rows 2\n# cols 3\n1 2 3\n4 5\n");
    try {
      read_matrix_text(path);
      FAIL("expected parse_error");
    } catch (const parse_error& e) {
      CHECK(e.line == 5);
    }
  }
  SUBCASE("value count must match rows*cols") {
    const std::string path = tmp_path("bad_count.txt");
    write_text_file(path,
                    "# coinccl-matrix v1\n# rows 3\n# cols 3\n1 2 3\n4 5 6\n");
    CHECK_THROWS_AS(read_matrix_text(path), parse_error);
  }
  SUBCASE("unknown comment keys are ignored") {
    const std::string path = tmp_path("extra_key.txt");
    write_text_file(path,
                    "# coinccl-matrix v1\n# rows 1\n# cols 2\n"
                    "# flavor cherry\n7 8\n");
    const Matrix m = read_matrix_text(path);
    CHECK(m.rows() == 1);
    CHECK(m(0, 1) == 8.0);
  }
  SUBCASE("malformed number names the token") {
    const std::string path = tmp_path("bad_number.txt");
    write_text_file(path, "# coinccl-matrix v1\n# rows 1\n# cols 1\n1x\n");
    CHECK_THROWS_AS(read_matrix_text(path), parse_error);
  }
  SUBCASE("mismatched row_values on write") {
    MatrixMeta meta;
    meta.row_values = {1.0, 2.0};
    CHECK_THROWS_AS(write_matrix_text(tmp_path("never.txt"), Matrix(3, 3),
                                      meta),
                    validation_error);
  }
}

TEST_CASE("binary matrix round-trips bitwise") {
  const std::string path = tmp_path("m.bin");
  const Matrix m = sample_matrix();
  const MatrixMeta meta = sample_meta();
  write_matrix_binary(path, m, meta);

  MatrixMeta back;
  const Matrix r = read_matrix_binary(path, &back);
  CHECK(r == m);
  check_meta_equal(back, meta);

  SUBCASE("meta-free variant") {
    MatrixMeta empty;
    write_matrix_binary(path, m, empty);
    MatrixMeta b2;
    const Matrix r2 = read_matrix_binary(path, &b2);
    CHECK(r2 == m);
    CHECK(b2.row_values.empty());
    CHECK(b2.col_values.empty());
  }
}

TEST_CASE("binary matrix corruption is detected") {
  const std::string good = tmp_path("good.bin");
  write_matrix_binary(good, sample_matrix(), sample_meta());
  const std::string bytes = read_text_file(good);

  SUBCASE("bad magic") {
    std::string z = bytes;
    z[0] = 'X';
    const std::string path = tmp_path("magic.bin");
    write_text_file(path, z);
    CHECK_THROWS_AS(read_matrix_binary(path), parse_error);
  }
  SUBCASE("unsupported version") {
    std::string z = bytes;
    z[4] = 2;
    const std::string path = tmp_path("version.bin");
    write_text_file(path, z);
    CHECK_THROWS_AS(read_matrix_binary(path), parse_error);
  }
  SUBCASE("truncated payload") {
    const std::string path = tmp_path("short.bin");
    write_text_file(path, bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(read_matrix_binary(path), parse_error);
  }
  SUBCASE("trailing bytes") {
    const std::string path = tmp_path("long.bin");
    write_text_file(path, bytes + "Z");
    CHECK_THROWS_AS(read_matrix_binary(path), parse_error);
  }
}

TEST_CASE("hit records round-trip with their sidecar") {
  const std::string path = tmp_path("hits.bin");
  std::vector<ElectronHit> hits = {{0, 0, 0.0, 25.0},
                                   {255, 128, 1562.5, 1000.0},
                                   {12, 300, 781.25, 50.0}};
  write_hits_binary(path, hits, EventTicks{}, 0xabcdull);
  CHECK(read_hits_binary(path) == hits);

  SUBCASE("custom tick durations are honored") {
    std::vector<ElectronHit> coarse = {{1, 2, 100.0, 40.0}};
    write_hits_binary(path, coarse, EventTicks{2.0, 10.0, 0.001}, 0);
    CHECK(read_hits_binary(path) == coarse);
    // without the sidecar the reader falls back to the default ticks
    std::filesystem::remove(path + ".json");
    const auto fallback = read_hits_binary(path);
    REQUIRE(fallback.size() == 1);
    CHECK(fallback[0].toa_ns == 50.0 * 1.5625);
    CHECK(fallback[0].tot_ns == 4.0 * 25.0);
  }
  SUBCASE("oversized charge clamps to the 16-bit record") {
    std::vector<ElectronHit> big = {{1, 1, 0.0, 2e6}};
    write_hits_binary(path, big, EventTicks{}, 0);
    const auto back = read_hits_binary(path);
    REQUIRE(back.size() == 1);
    CHECK(back[0].tot_ns == 65535.0 * 25.0);
  }
  SUBCASE("odd-sized files are rejected") {
    write_text_file(path, std::string(13, 'x'));
    std::filesystem::remove(path + ".json");
    CHECK_THROWS_AS(read_hits_binary(path), parse_error);
  }
}

TEST_CASE("photon records round-trip") {
  const std::string path = tmp_path("photons.bin");
  std::vector<PhotonTag> photons = {{0.0, 0},
                                    {123456.0 * 0.001, 0},
                                    {987654321.0 * 0.001, 7}};
  write_photons_binary(path, photons, EventTicks{}, 99);
  CHECK(read_photons_binary(path) == photons);

  SUBCASE("record size is enforced") {
    write_text_file(path, std::string(10, 'y'));
    std::filesystem::remove(path + ".json");
    CHECK_THROWS_AS(read_photons_binary(path), parse_error);
  }
}

TEST_CASE("csv event files round-trip") {
  SUBCASE("hits") {
    const std::string path = tmp_path("hits.csv");
    std::vector<ElectronHit> hits = {{3, 4, 12.8125, 75.0},
                                     {600, 1, 0.1, 25.0}};
    write_hits_csv(path, hits);
    CHECK(read_hits_csv(path) == hits);
  }
  SUBCASE("photons") {
    const std::string path = tmp_path("photons.csv");
    std::vector<PhotonTag> photons = {{0.25, 0}, {1e9, 255}};
    write_photons_csv(path, photons);
    CHECK(read_photons_csv(path) == photons);
  }
  SUBCASE("field count is validated") {
    const std::string path = tmp_path("bad.csv");
    write_text_file(path, "x,y,toa_ns,tot_ns\n1,2,3\n");
    try {
      read_hits_csv(path);
      FAIL("expected parse_error");
    } catch (const parse_error& e) {
      CHECK(e.line == 2);
    }
  }
}

TEST_CASE("ground truth round-trips") {
  const std::string path = tmp_path("truth.jsonl");
  GroundTruth truth;
  truth.electrons_total = 1000;
  truth.electrons_detected = 700;
  truth.photon_kind = {0, 1, 2, 0};
  TruthPair a;
  a.electron_id = 5;
  a.photon_id = 0;
  a.energy_eV = 2.7;
  a.qx_per_nm = -0.004;
  a.qy_per_nm = 0.0125;
  a.electron_detected = true;
  a.electron_toa_ns = 1562.5;
  a.photon_t_ns = 1640.25;
  TruthPair b;
  b.electron_id = 17;
  b.photon_id = 3;
  b.energy_eV = 3.1;
  b.electron_detected = false;
  b.electron_toa_ns = -1.0;
  b.photon_t_ns = 2.75;
  truth.pairs = {a, b};

  write_truth(path, truth, 0x42ull);
  const GroundTruth back = read_truth(path);
  CHECK(back.pairs == truth.pairs);
  CHECK(back.photon_kind == truth.photon_kind);
  CHECK(back.electrons_total == truth.electrons_total);
  CHECK(back.electrons_detected == truth.electrons_detected);
}

TEST_CASE("ground truth validation") {
  SUBCASE("unknown photon kind digit") {
    const std::string path = tmp_path("truth_badkind.jsonl");
    write_text_file(path,
                    "{\"format\":\"coinccl-truth v1\",\"electrons_total\":1,"
                    "\"electrons_detected\":1,\"photon_kinds\":\"013\","
                    "\"config_hash\":\"0\"}\n");
    CHECK_THROWS_AS(read_truth(path), parse_error);
  }
  SUBCASE("missing meta record") {
    const std::string path = tmp_path("truth_nometa.jsonl");
    write_text_file(path, "{\"electron_id\":1}\n");
    CHECK_THROWS_AS(read_truth(path), parse_error);
  }
  SUBCASE("empty file") {
    const std::string path = tmp_path("truth_empty.jsonl");
    write_text_file(path, "");
    CHECK_THROWS_AS(read_truth(path), parse_error);
  }
  SUBCASE("malformed pair record") {
    const std::string path = tmp_path("truth_badpair.jsonl");
    write_text_file(path,
                    "{\"format\":\"coinccl-truth v1\",\"electrons_total\":1,"
                    "\"electrons_detected\":1,\"photon_kinds\":\"\","
                    "\"config_hash\":\"0\"}\n{\"electron_id\":1}\n");
    try {
      read_truth(path);
      FAIL("expected parse_error");
    } catch (const parse_error& e) {
      CHECK(e.line == 2);
    }
  }
}

TEST_CASE("missing files raise io errors") {
  CHECK_THROWS_AS(read_text_file(tmp_path("does-not-exist")), io_error);
  CHECK_THROWS_AS(read_matrix_text(tmp_path("does-not-exist")), io_error);
  CHECK_THROWS_AS(read_hits_binary(tmp_path("does-not-exist")), io_error);
}
