#pragma once

#include <string>

#include "napi/napi.hpp"

namespace napi {

/// Dense matrices travel as header-free row-major CSV; sparse matrices as
/// MatrixMarket coordinate files. Readers throw config_error on malformed
/// input or unreadable paths.

Matrix read_csv_matrix(const std::string& path);
void write_csv_matrix(const std::string& path, const Matrix& m);

Matrix read_matrix_market(const std::string& path);
void write_matrix_market(const std::string& path, const Matrix& m);

/// Dispatch on extension: .mtx / .mm -> MatrixMarket, anything else -> CSV.
Matrix load_matrix(const std::string& path);

/// Header `t,passes,sin_theta,alpha,ls_ratio,wall_ms`. With
/// include_wall = false the wall_ms column is written as 0 so that repeated
/// runs produce byte-identical artifacts.
void write_trace_csv(const std::string& path, const ConvergenceTrace& trace,
                     bool include_wall = true);

}  // namespace napi
