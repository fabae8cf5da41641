#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "coinccl/eventgen.hpp"
#include "coinccl/grid.hpp"

namespace coinccl {

// 64-bit FNV-1a, used to stamp every output with the configuration hash.
std::uint64_t fnv1a(std::string_view text);
std::string hash_hex(std::uint64_t h);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

/// axis labels and coordinates carried alongside a gridded matrix
struct MatrixMeta {
  std::string row_axis = "row";
  std::string col_axis = "col";
  std::string units;
  std::vector<double> row_values; // empty or one per row
  std::vector<double> col_values; // empty or one per column
  std::uint64_t config_hash = 0;
};

// Text format: "# coinccl-matrix v1" header block followed by one
// whitespace-separated row per line, printed with %.17g so values
// round-trip exactly.
void write_matrix_text(const std::string& path, const Matrix& m,
                       const MatrixMeta& meta);
Matrix read_matrix_text(const std::string& path, MatrixMeta* meta = nullptr);

// Binary format, little-endian: magic "CCLM", u32 version, u64 config
// hash, u64 rows, u64 cols, length-prefixed axis/unit strings, optional
// axis coordinate arrays, then rows*cols f64 row-major.
void write_matrix_binary(const std::string& path, const Matrix& m,
                         const MatrixMeta& meta);
Matrix read_matrix_binary(const std::string& path, MatrixMeta* meta = nullptr);

/// tick durations for the event-stream binary formats
struct EventTicks {
  double toa_tick_ns = 1.5625;
  double tot_tick_ns = 25.0;
  double photon_tick_ns = 0.001;
};

// Electron hits: little-endian records (u16 x, u16 y, u64 toa_ticks,
// u16 tot_ticks), no header. A JSON sidecar at path + ".json" records
// the tick durations, record count and config hash; the reader honors
// the sidecar when present and falls back to the defaults above.
void write_hits_binary(const std::string& path,
                       const std::vector<ElectronHit>& hits,
                       const EventTicks& ticks, std::uint64_t config_hash);
std::vector<ElectronHit> read_hits_binary(const std::string& path);

// Photon tags: little-endian records (u64 t_ticks, u8 channel) with the
// same sidecar scheme.
void write_photons_binary(const std::string& path,
                          const std::vector<PhotonTag>& photons,
                          const EventTicks& ticks, std::uint64_t config_hash);
std::vector<PhotonTag> read_photons_binary(const std::string& path);

// CSV alternatives, one record per line with a header row.
void write_hits_csv(const std::string& path,
                    const std::vector<ElectronHit>& hits);
std::vector<ElectronHit> read_hits_csv(const std::string& path);
void write_photons_csv(const std::string& path,
                       const std::vector<PhotonTag>& photons);
std::vector<PhotonTag> read_photons_csv(const std::string& path);

// Ground truth as JSON lines: a meta record first (totals, per-photon
// kind digits, config hash), then one flat record per generated pair.
void write_truth(const std::string& path, const GroundTruth& truth,
                 std::uint64_t config_hash);
GroundTruth read_truth(const std::string& path);

} // namespace coinccl
