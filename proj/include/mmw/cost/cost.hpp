#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "mmw/core/error.hpp"
#include "mmw/cost/editlog.hpp"

namespace mmw {

// ---------------------------------------------------------------------------
// Exact rational arithmetic. Costs are never floats: symbolic and numeric
// results must agree exactly.
// ---------------------------------------------------------------------------

class Rational {
 public:
  Rational() = default;
  Rational(long long n) : num_(n), den_(1) {}  // NOLINT(google-explicit-constructor)
  Rational(long long n, long long d) : num_(n), den_(d) { normalize(); }

  long long num() const { return num_; }
  long long den() const { return den_; }

  // Parses "12", "-3", "1.5", "0.25", "3/4".
  static Rational parse(const std::string& text) {
    std::string s = text;
    if (s.empty()) throw Error("malformed-rational", "empty cost literal");
    auto slash = s.find('/');
    if (slash != std::string::npos) {
      return Rational(parse_int(s.substr(0, slash)), parse_int(s.substr(slash + 1)));
    }
    auto dot = s.find('.');
    if (dot == std::string::npos) return Rational(parse_int(s));
    std::string whole = s.substr(0, dot);
    std::string frac = s.substr(dot + 1);
    if (frac.empty()) return Rational(parse_int(whole.empty() ? "0" : whole));
    long long den = 1;
    for (char c : frac) {
      if (!std::isdigit(static_cast<unsigned char>(c)))
        throw Error("malformed-rational", "bad fractional digits in '" + text + "'");
      den *= 10;
    }
    bool neg = !whole.empty() && whole[0] == '-';
    long long w = parse_int(whole.empty() || whole == "-" ? (neg ? "-0" : "0") : whole);
    long long f = parse_int(frac);
    long long num = (neg ? -1 : 1) * (std::llabs(w) * den + f);
    return Rational(num, den);
  }

  Rational operator+(const Rational& o) const {
    return Rational(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
  }
  Rational operator-(const Rational& o) const {
    return Rational(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
  }
  Rational operator*(const Rational& o) const {
    return Rational(num_ * o.num_, den_ * o.den_);
  }
  Rational operator-() const { return Rational(-num_, den_); }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }

  bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator!=(const Rational& o) const { return !(*this == o); }
  bool operator<(const Rational& o) const { return num_ * o.den_ < o.num_ * den_; }
  bool operator<=(const Rational& o) const { return num_ * o.den_ <= o.num_ * den_; }
  bool operator>(const Rational& o) const { return o < *this; }
  bool operator>=(const Rational& o) const { return o <= *this; }

  std::string to_string() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

 private:
  static long long parse_int(const std::string& s) {
    if (s.empty()) throw Error("malformed-rational", "empty integer part");
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) throw Error("malformed-rational", "sign without digits");
    for (; i < s.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(s[i])))
        throw Error("malformed-rational", "bad integer '" + s + "'");
    return std::stoll(s);
  }

  void normalize() {
    if (den_ == 0) throw Error("malformed-rational", "zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    long long g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  long long num_ = 0;
  long long den_ = 1;
};

// ---------------------------------------------------------------------------
// Cost parameters (§4.3.1): implementation and deployment costs per component
// class plus the connection-establishment cost.
// ---------------------------------------------------------------------------

// Canonical term order used by SymbolicCost and all rendered expressions.
enum class CostTerm : int {
  MeImpl = 0,
  MeDepl,
  MePImpl,
  MePDepl,
  MaImpl,
  MaDepl,
  WDepl,
  ConnSet,
};

inline constexpr int kNumCostTerms = 8;

inline const char* term_name(CostTerm t) {
  switch (t) {
    case CostTerm::MeImpl: return "Me_impl";
    case CostTerm::MeDepl: return "Me_depl";
    case CostTerm::MePImpl: return "MeP_impl";
    case CostTerm::MePDepl: return "MeP_depl";
    case CostTerm::MaImpl: return "Ma_impl";
    case CostTerm::MaDepl: return "Ma_depl";
    case CostTerm::WDepl: return "W_depl";
    case CostTerm::ConnSet: return "Conn_set";
  }
  return "?";
}

struct CostParams {
  Rational me_impl{10};
  Rational mep_impl{6};
  Rational ma_impl{5};
  Rational me_depl{8};
  Rational mep_depl{5};
  Rational ma_depl{4};
  Rational w_depl{3};
  Rational conn_set{1};

  Rational term(CostTerm t) const {
    switch (t) {
      case CostTerm::MeImpl: return me_impl;
      case CostTerm::MeDepl: return me_depl;
      case CostTerm::MePImpl: return mep_impl;
      case CostTerm::MePDepl: return mep_depl;
      case CostTerm::MaImpl: return ma_impl;
      case CostTerm::MaDepl: return ma_depl;
      case CostTerm::WDepl: return w_depl;
      case CostTerm::ConnSet: return conn_set;
    }
    throw Error("internal", "bad term");
  }
};

struct ParamViolation {
  std::string code;
  std::string detail;
};

// Eqs (1)-(3) of §4.3.1 plus the mask-cheaper-than-mediator assumptions the
// paper states alongside them. All parameters must also be non-negative.
inline std::vector<ParamViolation> validate_params(const CostParams& p) {
  std::vector<ParamViolation> out;
  auto require = [&](bool ok, const std::string& code, const std::string& detail) {
    if (!ok) out.push_back({code, detail});
  };
  for (int i = 0; i < kNumCostTerms; ++i) {
    auto t = static_cast<CostTerm>(i);
    require(p.term(t) >= Rational(0), "negative-cost",
            std::string(term_name(t)) + " must be non-negative");
  }
  require(p.me_impl > p.mep_impl, "eq1-violated", "requires Me_impl > MeP_impl");
  require(p.me_depl > p.mep_depl, "eq2-violated", "requires Me_depl > MeP_depl");
  require(p.me_depl > p.ma_depl, "eq3-violated", "requires Me_depl > Ma_depl");
  require(p.ma_impl < p.me_impl, "mask-impl-not-cheaper", "requires Ma_impl < Me_impl");
  require(p.ma_depl < p.me_depl, "mask-depl-not-cheaper", "requires Ma_depl < Me_depl");
  return out;
}

// ---------------------------------------------------------------------------
// Symbolic costs: linear expressions over the cost terms where each
// coefficient may depend linearly on N (the wrapper count): coeff = k + n*N.
// ---------------------------------------------------------------------------

struct TermCoeff {
  long long k = 0;  // constant part
  long long n = 0;  // multiple of N

  bool zero() const { return k == 0 && n == 0; }
};

class SymbolicCost {
 public:
  SymbolicCost() = default;

  static SymbolicCost term(CostTerm t, long long k = 1, long long n = 0) {
    SymbolicCost c;
    c.coeffs_[static_cast<int>(t)] = {k, n};
    return c;
  }

  SymbolicCost operator+(const SymbolicCost& o) const {
    SymbolicCost r = *this;
    for (int i = 0; i < kNumCostTerms; ++i) {
      r.coeffs_[i].k += o.coeffs_[i].k;
      r.coeffs_[i].n += o.coeffs_[i].n;
    }
    return r;
  }
  SymbolicCost operator-(const SymbolicCost& o) const {
    SymbolicCost r = *this;
    for (int i = 0; i < kNumCostTerms; ++i) {
      r.coeffs_[i].k -= o.coeffs_[i].k;
      r.coeffs_[i].n -= o.coeffs_[i].n;
    }
    return r;
  }
  bool operator==(const SymbolicCost& o) const {
    for (int i = 0; i < kNumCostTerms; ++i)
      if (coeffs_[i].k != o.coeffs_[i].k || coeffs_[i].n != o.coeffs_[i].n) return false;
    return true;
  }
  bool operator!=(const SymbolicCost& o) const { return !(*this == o); }

  const TermCoeff& coeff(CostTerm t) const { return coeffs_[static_cast<int>(t)]; }

  Rational evaluate(const CostParams& p, long long n_wrappers) const {
    Rational total{0};
    for (int i = 0; i < kNumCostTerms; ++i) {
      const TermCoeff& c = coeffs_[i];
      if (c.zero()) continue;
      total += Rational(c.k + c.n * n_wrappers) * p.term(static_cast<CostTerm>(i));
    }
    return total;
  }

  // Canonical sum-of-terms string, e.g. "Me_impl + Me_depl + N*Conn_set" or
  // "2*Me_depl + (N+1)*Conn_set". Terms appear in canonical order; negative
  // coefficients join with " - ".
  std::string to_string() const {
    std::string out;
    for (int i = 0; i < kNumCostTerms; ++i) {
      TermCoeff c = coeffs_[i];
      if (c.zero()) continue;
      bool negative = c.n < 0 || (c.n == 0 && c.k < 0);
      if (negative) {
        c.k = -c.k;
        c.n = -c.n;
      }
      if (out.empty()) {
        if (negative) out += "-";
      } else {
        out += negative ? " - " : " + ";
      }
      out += render_coeff(c) + term_name(static_cast<CostTerm>(i));
    }
    return out.empty() ? "0" : out;
  }

 private:
  static std::string render_coeff(const TermCoeff& c) {
    if (c.n == 0) return c.k == 1 ? "" : std::to_string(c.k) + "*";
    std::string n_part = c.n == 1 ? "N" : std::to_string(c.n) + "*N";
    if (c.k == 0) return n_part + "*";
    return "(" + n_part + (c.k > 0 ? "+" : "-") + std::to_string(std::llabs(c.k)) + ")*";
  }

  std::array<TermCoeff, kNumCostTerms> coeffs_{};
};

struct ShiftCost {
  SymbolicCost symbolic;
  Rational numeric;
};

// ---------------------------------------------------------------------------
// Table 1 closed forms (§4.3.2-4.3.4) and overhead formulas (§4.3.5).
// ---------------------------------------------------------------------------

enum class Architecture { OneLMW, TwoLMW, MMW };

inline const char* to_string(Architecture a) {
  switch (a) {
    case Architecture::OneLMW: return "1LMW";
    case Architecture::TwoLMW: return "2LMW";
    case Architecture::MMW: return "MMW";
  }
  return "?";
}

inline std::optional<Architecture> parse_architecture(const std::string& s) {
  if (s == "1LMW") return Architecture::OneLMW;
  if (s == "2LMW") return Architecture::TwoLMW;
  if (s == "MMW") return Architecture::MMW;
  return std::nullopt;
}

inline SymbolicCost scenario_symbolic(int scenario, Architecture arch) {
  using T = CostTerm;
  auto t = [](CostTerm term, long long k = 1, long long n = 0) {
    return SymbolicCost::term(term, k, n);
  };
  switch (scenario) {
    case 1:  // new representation type
      switch (arch) {
        case Architecture::OneLMW:
          return t(T::MeImpl) + t(T::MeDepl) + t(T::ConnSet, 0, 1);
        case Architecture::TwoLMW:
          return t(T::MeImpl) + t(T::MeDepl) + t(T::ConnSet);
        case Architecture::MMW:
          return t(T::MaImpl) + t(T::MaDepl) + t(T::ConnSet);
      }
      break;
    case 2:  // new representation of an existing type
      switch (arch) {
        case Architecture::OneLMW:
          return t(T::MeDepl) + t(T::ConnSet, 0, 1);
        case Architecture::TwoLMW:
          return t(T::MeDepl) + t(T::ConnSet);
        case Architecture::MMW:
          return t(T::MaDepl) + t(T::ConnSet);
      }
      break;
    case 3:  // new mediation functionality
      switch (arch) {
        case Architecture::OneLMW:
          return t(T::MeDepl) + t(T::ConnSet, 0, 1);
        case Architecture::TwoLMW:
          return t(T::MeDepl, 2) + t(T::ConnSet, 1, 1);
        case Architecture::MMW:
          return t(T::MePDepl) + t(T::MaDepl) + t(T::ConnSet, 1, 1);
      }
      break;
    case 4:  // new data source: architecture-independent
      return t(T::WDepl) + t(T::ConnSet);
    default:
      break;
  }
  throw Error("unknown-scenario", "scenario must be 1..4, got " + std::to_string(scenario));
}

inline ShiftCost scenario_cost(int scenario, Architecture arch, long long n_wrappers,
                               const CostParams& p) {
  SymbolicCost sym = scenario_symbolic(scenario, arch);
  return {sym, sym.evaluate(p, n_wrappers)};
}

inline SymbolicCost overhead_symbolic(Architecture arch) {
  using T = CostTerm;
  switch (arch) {
    case Architecture::TwoLMW:
      return SymbolicCost::term(T::MeDepl) + SymbolicCost::term(T::ConnSet);
    case Architecture::MMW:
      return SymbolicCost::term(T::MePDepl) - SymbolicCost::term(T::MeDepl) +
             SymbolicCost::term(T::MaDepl) + SymbolicCost::term(T::ConnSet);
    case Architecture::OneLMW:
      break;
  }
  throw Error("unknown-architecture", "overhead is defined for 2LMW and MMW only");
}

inline ShiftCost overhead_cost(Architecture arch, long long n_wrappers, const CostParams& p) {
  SymbolicCost sym = overhead_symbolic(arch);
  (void)n_wrappers;  // overhead forms are N-free, but keep the signature uniform
  return {sym, sym.evaluate(p, n_wrappers)};
}

// ---------------------------------------------------------------------------
// Comparison table (Table 1) and EditLog pricing.
// ---------------------------------------------------------------------------

struct CompareCell {
  int scenario = 0;
  Architecture arch = Architecture::OneLMW;
  SymbolicCost symbolic;
  Rational numeric;
};

struct CompareTable {
  long long n_wrappers = 0;
  std::vector<CompareCell> cells;  // scenarios 1..4 x {1LMW, 2LMW, MMW}

  const CompareCell& cell(int scenario, Architecture arch) const {
    for (const auto& c : cells)
      if (c.scenario == scenario && c.arch == arch) return c;
    throw Error("internal", "missing compare cell");
  }
};

inline CompareTable compare_table(const CostParams& p, long long n_wrappers) {
  CompareTable t;
  t.n_wrappers = n_wrappers;
  for (int s = 1; s <= 4; ++s)
    for (Architecture a : {Architecture::OneLMW, Architecture::TwoLMW, Architecture::MMW}) {
      SymbolicCost sym = scenario_symbolic(s, a);
      t.cells.push_back({s, a, sym, sym.evaluate(p, n_wrappers)});
    }
  return t;
}

// Prices an EditLog as a symbolic cost: implement -> C_X_impl, deploy ->
// C_X_depl, connect -> C_Conn_set. The paper's cost set has no wrapper
// implementation cost, so implementing a wrapper is rejected.
inline SymbolicCost price_editlog_symbolic(const EditLog& log) {
  SymbolicCost total;
  for (const EditAction& a : log.actions) {
    CostTerm term;
    switch (a.act) {
      case EditAction::Act::Connect:
        term = CostTerm::ConnSet;
        break;
      case EditAction::Act::Implement:
        switch (a.comp) {
          case CompClass::Mask: term = CostTerm::MaImpl; break;
          case CompClass::MediatorRepr: term = CostTerm::MeImpl; break;
          case CompClass::MediatorPlain: term = CostTerm::MePImpl; break;
          case CompClass::Wrapper:
            throw Error("unsupported-cost-term",
                        "the cost model defines no wrapper implementation cost");
        }
        break;
      case EditAction::Act::Deploy:
        switch (a.comp) {
          case CompClass::Mask: term = CostTerm::MaDepl; break;
          case CompClass::MediatorRepr: term = CostTerm::MeDepl; break;
          case CompClass::MediatorPlain: term = CostTerm::MePDepl; break;
          case CompClass::Wrapper: term = CostTerm::WDepl; break;
        }
        break;
    }
    total = total + SymbolicCost::term(term);
  }
  return total;
}

inline ShiftCost price_editlog(const EditLog& log, const CostParams& p) {
  SymbolicCost sym = price_editlog_symbolic(log);
  return {sym, sym.evaluate(p, /*n_wrappers=*/0)};
}

}  // namespace mmw
