#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sae {

using Word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

constexpr std::size_t words_for_bits(std::size_t n_bits) { return (n_bits + kWordBits - 1) / kWordBits; }

// Non-owning view of a packed bit vector. Bits past n_bits in the last word are zero.
struct BitView {
  std::span<const Word> words;
  std::size_t n_bits = 0;

  bool test(std::size_t bit) const { return (words[bit / kWordBits] >> (bit % kWordBits)) & 1u; }
  std::size_t popcount() const;
};

class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t n_bits) : n_bits_(n_bits), words_(words_for_bits(n_bits), 0) {}
  BitVector(std::size_t n_bits, std::initializer_list<std::size_t> on_bits);

  void set(std::size_t bit, bool value = true);
  bool test(std::size_t bit) const { return view().test(bit); }
  std::size_t size() const { return n_bits_; }
  std::span<const Word> words() const { return words_; }
  BitView view() const { return {words_, n_bits_}; }
  operator BitView() const { return view(); }

 private:
  std::size_t n_bits_ = 0;
  std::vector<Word> words_;
};

// N packed fingerprints of equal width, addressed by position or sample id.
class FingerprintSet {
 public:
  explicit FingerprintSet(std::size_t n_bits);

  // Throws DomainError on a duplicate id and DimensionError on a width mismatch.
  void add(std::string id, BitView bits);

  std::size_t size() const { return ids_.size(); }
  std::size_t n_bits() const { return n_bits_; }
  std::size_t words_per_row() const { return stride_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  BitView row(std::size_t i) const {
    return {std::span<const Word>(data_).subspan(i * stride_, stride_), n_bits_};
  }
  // Position of id, or size() when absent.
  std::size_t find(std::string_view id) const;

 private:
  std::size_t n_bits_;
  std::size_t stride_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Word> data_;
};

enum class Measure { kTanimoto, kDice, kSokal, kCosine };

Measure parse_measure(std::string_view name);
std::string_view measure_name(Measure m);

// Binary similarity coefficients over on-bits. All return values in [0, 1];
// a pair with no on-bits at all scores 0. Width mismatch throws DimensionError.
double tanimoto(BitView a, BitView b);
double dice(BitView a, BitView b);
// Sokal-Sneath: c / (2|a| + 2|b| - 3c).
double sokal(BitView a, BitView b);
double cosine(BitView a, BitView b);
double similarity(Measure m, BitView a, BitView b);

}  // namespace sae
