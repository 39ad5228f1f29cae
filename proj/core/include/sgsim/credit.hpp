#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>
#include <utility>

#include "sgsim/ids.hpp"

namespace sgsim {

// One credit share: exactly 1/2^exponent. Shares are only ever halved, so
// a single exponent represents them without loss; exponent 0 is the whole
// unit credit.
struct Credit {
  int exponent = 0;

  friend bool operator==(const Credit&, const Credit&) = default;
};

// Splits a share into two exact halves that sum back to the original.
inline std::pair<Credit, Credit> credit_split(Credit c) {
  if (c.exponent >= (1 << 20))
    throw SimError("credit split depth exhausted");
  return {Credit{c.exponent + 1}, Credit{c.exponent + 1}};
}

std::string to_string(const Credit& c);

// Exact sum of credit shares as a dyadic rational num/2^exp in lowest
// terms. Used for the master's pool and for the conservation ledger; all
// arithmetic is exact at any depth.
class CreditPool {
 public:
  void add(Credit c);
  void sub(Credit c);  // must not drive the pool negative
  void add_pool(const CreditPool& other);

  bool is_zero() const { return num_ == 0; }
  bool is_one() const { return num_ == 1 && exp_ == 0; }
  // num/2^exp as a string, e.g. "7/2^3".
  std::string to_string() const;

  friend bool operator==(const CreditPool&, const CreditPool&) = default;

 private:
  void reduce();
  void raise_to(int exp);

  boost::multiprecision::cpp_int num_ = 0;
  int exp_ = 0;
};

// Conservation ledger for one computation: the master pool plus credit
// attached to in-flight messages plus credit held by workers must equal
// exactly one unit from start to termination.
class CreditLedger {
 public:
  void start();  // one unit enters the system, held by the master
  void held_to_flight(Credit c) { held_.sub(c); in_flight_.add(c); }
  void flight_to_held(Credit c) { in_flight_.sub(c); held_.add(c); }
  void flight_to_pool(Credit c) { in_flight_.sub(c); pool_.add(c); }

  const CreditPool& pool() const { return pool_; }
  const CreditPool& in_flight() const { return in_flight_; }
  const CreditPool& held() const { return held_; }

  // pool + in-flight + held == 1, exactly.
  bool conserved() const;
  bool finished() const { return pool_.is_one(); }
  std::string to_string() const;

 private:
  CreditPool pool_;
  CreditPool in_flight_;
  CreditPool held_;
};

}  // namespace sgsim
