#pragma once

#include <memory>
#include <string>
#include <vector>

#include "snls/config.hpp"
#include "snls/spectral.hpp"

namespace snls {

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

/// Comma-separated rows at 17 significant digits; byte-stable across runs
/// with identical inputs.
std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

/// stem.bin: raw little-endian IEEE-754 complex pairs, row-major.
/// stem.json: sidecar with shape, dtype, layout, byte order.
void write_field_snapshot(const std::string& stem, const ComplexField& field);
ComplexField read_field_snapshot(const std::string& stem,
                                 std::shared_ptr<const SpectralGrid> grid);

std::string sha256_hex_file(const std::string& path);

/// Runs one subcommand into out_dir: writes the config echo, the
/// module-specific artifacts, and a manifest hashing every artifact.
/// Subcommands: simulate | skeleton | yosida | convergence | continuity |
/// instanton | rare-event | wongzakai | check.  Returns the process exit
/// status: 0 when every declared check passed.
int run_experiment(const ExperimentConfig& cfg, const std::string& subcommand,
                   const std::string& out_dir);

}  // namespace snls
