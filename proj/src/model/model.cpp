#include "model/model.hpp"

#include "common/error.hpp"

namespace mfg {

Profile parse_profile(const std::string& name) {
  if (name == "identity" || name == "zero") return Profile::Identity;
  if (name == "cubic") return Profile::Cubic;
  if (name == "negated") return Profile::Negated;
  throw ConfigError("unknown coupling profile '" + name + "'");
}

HamiltonianKind parse_hamiltonian(const std::string& name) {
  if (name == "relativistic") return HamiltonianKind::Relativistic;
  if (name == "truncated_quadratic") return HamiltonianKind::TruncatedQuadratic;
  if (name == "constant") return HamiltonianKind::Constant;
  throw ConfigError("unknown hamiltonian '" + name + "'");
}

bool Model::trivial() const {
  return F.is_zero() && G.is_zero() && H.kind() == HamiltonianKind::Constant &&
         H.H({0.0, 0.0}, {0.0, 0.0}) == 0.0 && H.x_independent();
}

Model build_model(const ModelParams& p, const Grid& g) {
  if (p.beta < 0.0) throw ConfigError("beta must be nonnegative");
  Model m;
  m.H = Hamiltonian(parse_hamiltonian(p.hamiltonian), g.dim(), p.eps, p.radius, p.h_constant);
  const Profile prof = parse_profile(p.coupling);
  const bool zero = p.coupling == "zero";
  m.F = Coupling(g, p.sigma, prof, zero ? 0.0 : p.kappa);
  m.G = Coupling(g, p.sigma_g, prof, zero ? 0.0 : p.kappa_g);
  m.beta = p.beta;
  return m;
}

Model trivial_model(const Grid& g) {
  Model m;
  m.H = Hamiltonian::constant(g.dim(), 0.0);
  m.F = Coupling::zero(g);
  m.G = Coupling::zero(g);
  return m;
}

}  // namespace mfg
