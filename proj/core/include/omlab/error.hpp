#pragma once

#include <stdexcept>
#include <string>

namespace omlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Two grid functions (or a function and a weight) live on different grids.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

// The complementary function is only defined for convex inputs.
class NonConvexInput : public Error {
 public:
  using Error::Error;
};

// Dilation indices need a(Φ) = 0 and b(Φ) = ∞.
class DomainNotFullRange : public Error {
 public:
  using Error::Error;
};

// The radial tail of a growth function does not decay, so ∫_r^∞ φ(x,t) dt/t
// diverges.
class TailNotExtrapolable : public Error {
 public:
  using Error::Error;
};

// ∫_0^1 ω(t)/t dt keeps growing under refinement.
class ModulusNotDini : public Error {
 public:
  using Error::Error;
};

}  // namespace omlab
