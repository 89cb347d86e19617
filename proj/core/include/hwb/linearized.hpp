#pragma once

// Linearized operators around Q, the correction-profile chain and coercivity.

#include <map>
#include <string>

#include "hwb/ground_state.hpp"
#include "hwb/line.hpp"

namespace hwb {

enum class LSign { plus, minus };

// L+ = D + 1 - 3Q^2, L- = D + 1 - Q^2.
LineField apply_L(LSign sign, const LineField& f, const GroundState& gs);

struct ConstrainedSolution {
  LineField field;
  double residual = 0.0;       // |L f - rhs| / |rhs|
  double compatibility = 0.0;  // |<rhs, kernel>| / (|rhs| |kernel|)
  int iterations = 0;
};

// Solves L f = rhs on the parity subspace with f orthogonal to the kernel
// (Q for L-, Q' for L+). Rejects rhs with the wrong parity or a kernel component.
ConstrainedSolution solve_constrained(LSign sign, const LineField& rhs, Parity parity, double tol,
                                      const GroundState& gs);

struct ProfileSet {
  LineField q, s1, g1, g2, s2, s3, rho;
  // varrho(b, v) = b * varrho_b + v * varrho_v.
  LineField varrho_b, varrho_v;
  std::map<std::string, double> solve_residuals;
  std::map<std::string, Parity> parities;
  double e1 = 0.0;  // <S1, Lambda Q>
  double p1 = 0.0;  // 2 <L- G1, G1>
  double varrho_compatibility = 0.0;
};

ProfileSet build_profile_chain(const GroundState& gs, double tol);
LineField solve_varrho(const ProfileSet& profiles, double b, double v);

struct KernelReport {
  double lminus_q = 0.0;        // |L- Q| / |Q|
  double lplus_dq = 0.0;        // |L+ Q'| / |Q'|
  double lplus_lambda_q = 0.0;  // |L+ LambdaQ + Q| / |Q|
  double lplus_lambda_q_two = 0.0;  // |L+ LambdaQ + 2Q| / |Q|, the other normalization
  double lplus_rho = 0.0;       // |L+ rho - S1| / |S1|
  double lminus_g1 = 0.0;       // |L- G1 + Q'| / |Q'|
  double lminus_s1 = 0.0;       // |L- S1 - LambdaQ| / |LambdaQ|
  double mass_identity = 0.0;   // (<S1,S1> + 2<Q,S2>) / <S1,S1>
};

KernelReport kernel_identities(const GroundState& gs, const ProfileSet& p);

double scal(const LineField& f, const ProfileSet& p);

// Minimum of (<L+ f1, f1> + <L- f2, f2>) / |f|_{H^1/2}^2 over n_probe rational
// probe functions per component, orthogonal to the six Scal directions when project is set.
double coercivity_rayleigh(const GroundState& gs, const ProfileSet& p, int n_probe, bool project = true);

// Same with the weight phi_A(x) = phi(x/A), phi = 1 on |x| <= 1, |x|^-a on |x| >= 2.
double localized_coercivity_check(const GroundState& gs, const ProfileSet& p, double A, double a,
                                  int n_probe);
double coercivity_weight(double x, double A, double a);

}  // namespace hwb
