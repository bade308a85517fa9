#pragma once

#include <filesystem>

#include "ivlab/solve.hpp"

namespace ivlab {

/// Field checkpoints: <base>.bin holds row-major little-endian f64 payload
/// (complex pairs for sections, then one block per link axis), <base>.json is
/// the sidecar descriptor with domain, epsilon and twist data.
void save_field(const ScalarField& f, const std::string& base);
void save_field(const GaugePair& p, const std::string& base);
ScalarField load_scalar_field(const std::string& base);
GaugePair load_gauge_pair(const std::string& base);

/// FNV-1a 64-bit digest, hex-encoded.
std::string fnv1a_hex(const void* data, size_t count);
std::string file_digest(const std::string& path);

/// Stable float formatting for machine-readable outputs (shortest
/// round-trippable form).
std::string format_real(Real v);

/// CSV with the fixed row layout used by every experiment:
/// experiment, model, epsilon, grid, quantity, value, tolerance, pass.
class CsvWriter {
 public:
  explicit CsvWriter(std::string experiment, std::string model)
      : experiment_(std::move(experiment)), model_(std::move(model)) {}

  void row(Real epsilon, const std::string& grid, const std::string& quantity, Real value,
           Real tolerance, bool pass);
  /// Rows that are informational only (tolerance left empty, pass = true).
  void info(Real epsilon, const std::string& grid, const std::string& quantity, Real value);

  bool all_passed() const { return all_passed_; }
  std::string str() const;
  void write(const std::string& path) const;

 private:
  std::string experiment_, model_;
  std::vector<std::string> rows_;
  bool all_passed_ = true;
};

std::string grid_label(const TorusDomain& dom);

}  // namespace ivlab
