#ifndef PPRVARI_ORDERED_MAP_HPP
#define PPRVARI_ORDERED_MAP_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pprvari {

/// Insertion-ordered associative container. Iteration yields entries in the
/// order they were first inserted; lookup is hashed.
template <typename Key, typename Value>
class OrderedMap {
 public:
  using value_type = std::pair<Key, Value>;
  using iterator = typename std::vector<value_type>::iterator;
  using const_iterator = typename std::vector<value_type>::const_iterator;

  OrderedMap() = default;
  OrderedMap(std::initializer_list<value_type> init) {
    for (const auto& entry : init) insert_or_assign(entry.first, entry.second);
  }

  /// Returns false (and leaves the map unchanged) when the key exists.
  bool insert(Key key, Value value) {
    if (index_.count(key) != 0) return false;
    index_.emplace(key, entries_.size());
    entries_.emplace_back(std::move(key), std::move(value));
    return true;
  }

  void insert_or_assign(const Key& key, Value value) {
    auto it = index_.find(key);
    if (it != index_.end()) {
      entries_[it->second].second = std::move(value);
      return;
    }
    insert(key, std::move(value));
  }

  bool erase(const Key& key) {
    auto it = index_.find(key);
    if (it == index_.end()) return false;
    entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(it->second));
    reindex();
    return true;
  }

  [[nodiscard]] bool contains(const Key& key) const { return index_.count(key) != 0; }

  [[nodiscard]] const Value* find(const Key& key) const {
    auto it = index_.find(key);
    return it == index_.end() ? nullptr : &entries_[it->second].second;
  }
  [[nodiscard]] Value* find(const Key& key) {
    auto it = index_.find(key);
    return it == index_.end() ? nullptr : &entries_[it->second].second;
  }

  [[nodiscard]] const Value& at(const Key& key) const {
    const Value* v = find(key);
    if (v == nullptr) throw std::out_of_range("OrderedMap::at: missing key");
    return *v;
  }
  [[nodiscard]] Value& at(const Key& key) {
    Value* v = find(key);
    if (v == nullptr) throw std::out_of_range("OrderedMap::at: missing key");
    return *v;
  }

  /// Position of the key in insertion order, or size() when absent.
  [[nodiscard]] std::size_t position(const Key& key) const {
    auto it = index_.find(key);
    return it == index_.end() ? entries_.size() : it->second;
  }

  [[nodiscard]] std::vector<Key> keys() const {
    std::vector<Key> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.first);
    return out;
  }

  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] bool empty() const { return entries_.empty(); }
  void clear() {
    entries_.clear();
    index_.clear();
  }

  iterator begin() { return entries_.begin(); }
  iterator end() { return entries_.end(); }
  const_iterator begin() const { return entries_.begin(); }
  const_iterator end() const { return entries_.end(); }

  friend bool operator==(const OrderedMap& a, const OrderedMap& b) { return a.entries_ == b.entries_; }

 private:
  void reindex() {
    index_.clear();
    for (std::size_t i = 0; i < entries_.size(); ++i) index_.emplace(entries_[i].first, i);
  }

  std::vector<value_type> entries_;
  std::unordered_map<Key, std::size_t> index_;
};

}  // namespace pprvari

#endif  // PPRVARI_ORDERED_MAP_HPP
