#pragma once

#include "lyapcert/model.hpp"

#include <vector>

namespace lyapcert::fixtures {

inline MethodRepresentation build(Family f, std::vector<double> params, std::vector<FunctionClass> classes) {
  MethodRepresentation rep = zoo_build(f, params, classes);
  return normalized(rep, validate(rep));
}

inline MethodRepresentation gradient_method(double gamma, FunctionClass cls) {
  return build(Family::heavy_ball, {gamma, 0.0}, {cls});
}

/// x+ = x, y = x: no input reaches the state.
inline MethodRepresentation identity_dynamics() {
  MethodRepresentation rep;
  rep.n = 1;
  rep.m = 1;
  rep.A = Mat::Identity(1, 1);
  rep.B = Mat::Zero(1, 1);
  rep.C = Mat::Identity(1, 1);
  rep.D = Mat::Zero(1, 1);
  rep.classes = {{0.0, kInf}};
  return rep;
}

}  // namespace lyapcert::fixtures
