#include "sgsim/credit.hpp"

namespace sgsim {

std::string to_string(const Credit& c) {
  if (c.exponent == 0) return "1";
  return "1/2^" + std::to_string(c.exponent);
}

void CreditPool::raise_to(int exp) {
  if (exp <= exp_) return;
  num_ <<= (exp - exp_);
  exp_ = exp;
}

void CreditPool::reduce() {
  if (num_ == 0) {
    exp_ = 0;
    return;
  }
  while (exp_ > 0 && (num_ & 1) == 0) {
    num_ >>= 1;
    --exp_;
  }
}

void CreditPool::add(Credit c) {
  raise_to(c.exponent);
  num_ += boost::multiprecision::cpp_int(1) << (exp_ - c.exponent);
  reduce();
}

void CreditPool::sub(Credit c) {
  raise_to(c.exponent);
  num_ -= boost::multiprecision::cpp_int(1) << (exp_ - c.exponent);
  if (num_ < 0) throw SimError("credit pool went negative");
  reduce();
}

void CreditPool::add_pool(const CreditPool& other) {
  raise_to(other.exp_);
  num_ += other.num_ << (exp_ - other.exp_);
  reduce();
}

std::string CreditPool::to_string() const {
  if (exp_ == 0) return num_.str();
  return num_.str() + "/2^" + std::to_string(exp_);
}

void CreditLedger::start() {
  if (!pool_.is_zero() || !in_flight_.is_zero() || !held_.is_zero())
    throw SimError("credit ledger already started");
  held_.add(Credit{0});
}

bool CreditLedger::conserved() const {
  CreditPool total = pool_;
  total.add_pool(in_flight_);
  total.add_pool(held_);
  return total.is_one();
}

std::string CreditLedger::to_string() const {
  return "pool=" + pool_.to_string() + " in_flight=" + in_flight_.to_string() +
         " held=" + held_.to_string();
}

}  // namespace sgsim
