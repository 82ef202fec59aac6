#include "sae/fingerprint.hpp"

#include <bit>
#include <cmath>

#include "sae/errors.hpp"

namespace sae {

std::size_t BitView::popcount() const {
  std::size_t n = 0;
  for (Word w : words) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

BitVector::BitVector(std::size_t n_bits, std::initializer_list<std::size_t> on_bits) : BitVector(n_bits) {
  for (std::size_t b : on_bits) set(b);
}

void BitVector::set(std::size_t bit, bool value) {
  if (bit >= n_bits_) throw DimensionError("bit index " + std::to_string(bit) + " out of range");
  const Word mask = Word{1} << (bit % kWordBits);
  if (value)
    words_[bit / kWordBits] |= mask;
  else
    words_[bit / kWordBits] &= ~mask;
}

FingerprintSet::FingerprintSet(std::size_t n_bits) : n_bits_(n_bits), stride_(words_for_bits(n_bits)) {
  if (n_bits == 0) throw DomainError("fingerprint width must be positive");
}

void FingerprintSet::add(std::string id, BitView bits) {
  if (bits.n_bits != n_bits_ || bits.words.size() != stride_)
    throw DimensionError("fingerprint '" + id + "' has " + std::to_string(bits.n_bits) + " bits, expected " +
                         std::to_string(n_bits_));
  if (index_.contains(id)) throw DomainError("duplicate sample id '" + id + "'");
  index_.emplace(id, ids_.size());
  ids_.push_back(std::move(id));
  data_.insert(data_.end(), bits.words.begin(), bits.words.end());
}

std::size_t FingerprintSet::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? size() : it->second;
}

Measure parse_measure(std::string_view name) {
  if (name == "tanimoto") return Measure::kTanimoto;
  if (name == "dice") return Measure::kDice;
  if (name == "sokal") return Measure::kSokal;
  if (name == "cosine") return Measure::kCosine;
  throw UsageError("unknown similarity measure '" + std::string(name) + "'");
}

std::string_view measure_name(Measure m) {
  switch (m) {
    case Measure::kTanimoto: return "tanimoto";
    case Measure::kDice: return "dice";
    case Measure::kSokal: return "sokal";
    case Measure::kCosine: return "cosine";
  }
  return "?";
}

namespace {

struct Counts {
  std::size_t a = 0, b = 0, common = 0;
};

Counts count_bits(BitView a, BitView b) {
  if (a.n_bits != b.n_bits || a.words.size() != b.words.size())
    throw DimensionError("bit vectors of width " + std::to_string(a.n_bits) + " and " + std::to_string(b.n_bits));
  Counts c;
  for (std::size_t w = 0; w < a.words.size(); ++w) {
    c.a += static_cast<std::size_t>(std::popcount(a.words[w]));
    c.b += static_cast<std::size_t>(std::popcount(b.words[w]));
    c.common += static_cast<std::size_t>(std::popcount(a.words[w] & b.words[w]));
  }
  return c;
}

}  // namespace

double tanimoto(BitView a, BitView b) {
  const Counts c = count_bits(a, b);
  const std::size_t uni = c.a + c.b - c.common;
  return uni == 0 ? 0.0 : static_cast<double>(c.common) / static_cast<double>(uni);
}

double dice(BitView a, BitView b) {
  const Counts c = count_bits(a, b);
  const std::size_t den = c.a + c.b;
  return den == 0 ? 0.0 : 2.0 * static_cast<double>(c.common) / static_cast<double>(den);
}

double sokal(BitView a, BitView b) {
  const Counts c = count_bits(a, b);
  const std::size_t den = 2 * c.a + 2 * c.b - 3 * c.common;
  return den == 0 ? 0.0 : static_cast<double>(c.common) / static_cast<double>(den);
}

double cosine(BitView a, BitView b) {
  const Counts c = count_bits(a, b);
  if (c.a == 0 || c.b == 0) return 0.0;
  return static_cast<double>(c.common) / std::sqrt(static_cast<double>(c.a) * static_cast<double>(c.b));
}

double similarity(Measure m, BitView a, BitView b) {
  switch (m) {
    case Measure::kTanimoto: return tanimoto(a, b);
    case Measure::kDice: return dice(a, b);
    case Measure::kSokal: return sokal(a, b);
    case Measure::kCosine: return cosine(a, b);
  }
  return 0.0;
}

}  // namespace sae
