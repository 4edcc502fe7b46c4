#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <stdexcept>
#include <string>

namespace gridgen {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using SpMat = Eigen::SparseMatrix<double>;
using SpCMat = Eigen::SparseMatrix<std::complex<double>>;
using Complex = std::complex<double>;
using Triplet = Eigen::Triplet<double>;
using CTriplet = Eigen::Triplet<std::complex<double>>;

inline constexpr int kHoursPerDay = 24;
inline constexpr int kHoursPerWeek = 168;
inline constexpr int kDaysPerYear = 364;
inline constexpr int kWeeksPerYear = 52;
inline constexpr int kStepsPerYear = kDaysPerYear * kHoursPerDay;  // 8736
inline constexpr double kBaseMW = 100.0;  // power of one per-unit

// Generator technology groups. Source files with other vocabularies are
// mapped onto this closed set ("other" is the catch-all).
enum class GenType {
  nuclear,
  coal,
  gas_oil,
  hydro_storage,
  hydro_river,
  hydro_unspecified,
  other,
};

const char* to_string(GenType t);
GenType gen_type_from_string(const std::string& s);

// Error categories map one-to-one onto process exit codes.
enum class ErrorKind { input = 1, solver = 2, validation = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_input(const std::string& msg) {
  throw Error(ErrorKind::input, msg);
}
[[noreturn]] inline void fail_solver(const std::string& msg) {
  throw Error(ErrorKind::solver, msg);
}
[[noreturn]] inline void fail_validation(const std::string& msg) {
  throw Error(ErrorKind::validation, msg);
}

}  // namespace gridgen
