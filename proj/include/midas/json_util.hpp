#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "midas/error.hpp"

namespace midas {

using json = nlohmann::json;

// Path-tracking view over a JSON value. Every accessor failure throws a
// DecodeError that names the offending field.
class Reader {
 public:
  Reader(const json& value, std::string path = "$") : value_(&value), path_(std::move(path)) {}

  const json& raw() const { return *value_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& message) const { throw DecodeError(path_, message); }

  Reader at(std::string_view key) const {
    if (!value_->is_object()) fail("expected object");
    auto it = value_->find(key);
    if (it == value_->end()) throw DecodeError(child(key), "missing required field");
    return Reader(*it, child(key));
  }

  std::optional<Reader> maybe(std::string_view key) const {
    if (!value_->is_object()) fail("expected object");
    auto it = value_->find(key);
    if (it == value_->end() || it->is_null()) return std::nullopt;
    return Reader(*it, child(key));
  }

  bool has(std::string_view key) const { return value_->is_object() && value_->contains(key); }

  std::vector<Reader> items() const {
    if (!value_->is_array()) fail("expected array");
    std::vector<Reader> out;
    out.reserve(value_->size());
    for (std::size_t i = 0; i < value_->size(); ++i) {
      out.emplace_back((*value_)[i], path_ + "[" + std::to_string(i) + "]");
    }
    return out;
  }

  std::vector<std::pair<std::string, Reader>> entries() const {
    if (!value_->is_object()) fail("expected object");
    std::vector<std::pair<std::string, Reader>> out;
    for (auto it = value_->begin(); it != value_->end(); ++it) {
      out.emplace_back(it.key(), Reader(it.value(), child(it.key())));
    }
    return out;
  }

  std::string str() const {
    if (!value_->is_string()) fail("expected string");
    return value_->get<std::string>();
  }

  std::string nonempty_str() const {
    auto s = str();
    if (s.empty()) fail("must be non-empty");
    return s;
  }

  double number() const {
    if (!value_->is_number()) fail("expected number");
    return value_->get<double>();
  }

  std::int64_t integer() const {
    if (!value_->is_number_integer()) fail("expected integer");
    return value_->get<std::int64_t>();
  }

  std::uint64_t unsigned_integer() const {
    if (!value_->is_number_unsigned() && !(value_->is_number_integer() && value_->get<std::int64_t>() >= 0)) {
      fail("expected non-negative integer");
    }
    return value_->get<std::uint64_t>();
  }

  bool boolean() const {
    if (!value_->is_boolean()) fail("expected boolean");
    return value_->get<bool>();
  }

  std::vector<std::string> strings() const {
    std::vector<std::string> out;
    for (const auto& item : items()) out.push_back(item.str());
    return out;
  }

  std::vector<double> numbers() const {
    std::vector<double> out;
    for (const auto& item : items()) out.push_back(item.number());
    return out;
  }

 private:
  std::string child(std::string_view key) const { return path_ + "." + std::string(key); }

  const json* value_;
  std::string path_;
};

// Bidirectional enum <-> name table used by every serialized enum.
template <typename Enum, std::size_t N>
struct EnumNames {
  std::pair<Enum, std::string_view> table[N];

  std::string_view name(Enum e) const {
    for (const auto& [value, text] : table) {
      if (value == e) return text;
    }
    return "?";
  }

  std::optional<Enum> parse(std::string_view text) const {
    for (const auto& [value, name] : table) {
      if (name == text) return value;
    }
    return std::nullopt;
  }

  Enum decode(const Reader& r) const {
    auto text = r.str();
    if (auto e = parse(text)) return *e;
    r.fail("unknown value '" + text + "'");
  }
};

}  // namespace midas
