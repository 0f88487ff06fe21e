#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace l2inv {

/// Cusped hyperbolic quotient split into a compact core and k cusp ends
/// [0, inf) x G_j with metric dt^2 + e^{-2t} dx^2.
struct CuspModel {
  int n = 3;
  std::vector<double> cross_sections; ///< Vol(G_j) at t = 0
  double core_volume = 0.0;
  bool demo_only = false; ///< set for illustrative fixtures of even dimension

  int k() const { return static_cast<int>(cross_sections.size()); }
  /// Throws InvalidArgument for bad volumes, NonOddDimension for even n
  /// unless demo_only.
  void validate() const;
};

CuspModel make_cusp_model(int n, std::vector<double> cross_sections, double core_volume);

/// Throws NonOddDimension unless n is odd and at least 3.
void require_odd_dimension(const CuspModel &model);

/// Volume of the cusp slab [R, S] x G; S may be +infinity. Throws BadRange.
double vol_slab(const CuspModel &model, double r, double s);
double vol_boundary(const CuspModel &model, double r);
double vol_thick(const CuspModel &model, double r);
double total_volume(const CuspModel &model);

/// e^{-(n-1)(R-1)}; for n = 3 this is e^{-2R+2}.
double warp_factor(const CuspModel &model, double r);

/// Three-cusp illustrative surface of total area 2 pi (n = 2, demo only).
CuspModel h2_example();

struct LedgerRow {
  double r = 0.0;
  std::optional<double> log_an_rho;
  std::optional<double> log_an_trivial;
  std::optional<double> log_top_trivial;
  std::optional<double> dim_rho;
};

struct AnomalyLedger {
  std::vector<LedgerRow> rows;

  /// Throws BadRange unless R is strictly increasing.
  void validate() const;
};

/// Columns R,logTan_rho,logTan_triv,logTtop_triv,dim_rho; empty cells are
/// missing fields. Throws BadTable.
AnomalyLedger read_ledger_csv(std::istream &in);

/// log T^An_R(rho) + dim(rho) (log T^Top_R(1) - log T^An_R(1)). Throws MissingField.
double anomaly_combine(const LedgerRow &row);

struct ConvergenceReport {
  double limit = 0.0;
  double rate = 0.0; ///< +infinity for a constant ledger
  double amplitude = 0.0; ///< B at the first R of the ledger
  double rms_residual = 0.0;
  bool monotone = true; ///< |value - limit| decreases along R
  std::vector<double> r;
  std::vector<double> values;
  std::vector<double> fitted;
};

/// Fits log T^An_R(rho) = L + B e^{-cR}. Throws InsufficientData below 3 rows
/// and MissingField when a value is absent.
ConvergenceReport convergence_report(const AnomalyLedger &ledger);

/// CSV with header R,value,fitted,residual.
void write_csv(std::ostream &out, const ConvergenceReport &report);

} // namespace l2inv
