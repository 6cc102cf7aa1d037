#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace adiasim {

// Value of a wall profile d(.) together with its first two derivatives with
// respect to the slow argument (tau = eps*t for the wall problems, X = eps*x
// for the waveguide).
struct ProfileValue {
  double d = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

struct PositivityReport {
  bool accepted = false;
  double min_d = 0.0;       // smallest sampled/refined value of d
  double tau_min = 0.0;     // where it was found
  double max_abs_d1 = 0.0;  // largest sampled/refined |d'|; wall-speed bound
  double d_min_required = 0.0;
  long grid_points = 0;
};

// Parsed, immutable expression tree over `tau`. Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | primary ('^' factor)?
//   primary:= number | 'tau' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
// with func in {sin, cos, tan, exp, tanh, sqrt, atan}. Exponentiation is
// right-associative and binds tighter than unary minus, so "-tau^2" means
// -(tau^2).
//
// Immutable after parsing; safe to share across threads.
class Profile {
public:
  static Profile parse(std::string_view source);

  // Evaluates d, d', d'' at tau via degree-2 forward-mode duals (no finite
  // differencing). Throws Errc::domain with the offending subexpression on
  // sqrt of a negative, division by zero, non-integer power of a
  // non-positive base, or a non-finite result.
  ProfileValue eval(double tau) const;

  // Printable form; reparsing it evaluates identically.
  std::string format() const;

  // Samples [tau_lo, tau_hi] on a dense grid (at least min_grid points) and
  // refines around derivative sign changes; accepts iff min d >= d_min.
  // Also reports the refined bound on |d'| used for impact-time bracketing.
  PositivityReport check_positive(double tau_lo, double tau_hi, double d_min,
                                  long min_grid = 10000) const;

  const std::string& source() const { return source_; }

private:
  enum class Op : unsigned char {
    number, tau,
    add, sub, mul, div, pow, pow_int, neg,
    fsin, fcos, ftan, fexp, ftanh, fsqrt, fatan,
  };

  struct Node {
    Op op;
    double number = 0.0;   // number: literal value; pow_int: exponent
    int a = -1;            // child indices into nodes_
    int b = -1;
    unsigned offset = 0;   // byte offset in source_, for error reporting
  };

  class Parser;

  std::vector<Node> nodes_;
  int root_ = -1;
  std::string source_;

  void format_node(int idx, std::string& out) const;
};

} // namespace adiasim
