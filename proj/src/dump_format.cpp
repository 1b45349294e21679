#include "transrank/dump_format.hpp"

#include "transrank/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <tuple>

namespace transrank {
namespace {

using json = nlohmann::json;

constexpr std::uint64_t kMaxHeaderBytes = 64ull << 20;
constexpr std::uint64_t kSeekThreshold = 64ull << 10;

template <typename T>
T byteswap(T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  std::reverse(bytes, bytes + sizeof(T));
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

template <typename T>
T to_little(T value) {
  if constexpr (std::endian::native == std::endian::little) {
    return value;
  } else {
    return byteswap(value);
  }
}

// Element-wise conversion of a whole array; a no-op on little-endian hosts.
template <typename T>
void swap_array_if_big(std::span<T> values) {
  if constexpr (std::endian::native != std::endian::little) {
    for (auto& v : values) v = byteswap(v);
  }
}

std::string record_prefix(std::uint64_t index) {
  return "record " + std::to_string(index) + ": ";
}

}  // namespace

// ---------------------------------------------------------------------------
// Header

void DumpHeader::validate() const {
  if (num_layers < 2) {
    throw ValidationError("header: num_layers must be >= 2 (embedding + 1), got " +
                          std::to_string(num_layers));
  }
  if (hidden_dim < 1) throw ValidationError("header: hidden_dim must be >= 1");
  if (num_items < 1) throw ValidationError("header: num_items must be >= 1");
  if (label_names.empty()) {
    throw ValidationError("header: label_names must not be empty");
  }
  if (label_names.size() >
      static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
    throw ValidationError("header: too many labels");
  }
  if (dtype != "f32") {
    throw ValidationError("header: unsupported dtype '" + dtype + "'");
  }
}

std::string DumpHeader::to_json() const {
  json j;
  j["model_name"] = model_name;
  j["task_type"] = std::string(to_string(task_type));
  j["num_items"] = num_items;
  j["num_layers"] = num_layers;
  j["hidden_dim"] = hidden_dim;
  j["label_names"] = label_names;
  j["dtype"] = dtype;
  return j.dump();
}

DumpHeader DumpHeader::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("header is not valid JSON: ") + e.what());
  }
  DumpHeader h;
  try {
    h.model_name = j.at("model_name").get<std::string>();
    h.task_type = parse_task_type(j.at("task_type").get<std::string>());
    h.num_items = j.at("num_items").get<std::uint64_t>();
    h.num_layers = j.at("num_layers").get<std::uint32_t>();
    h.hidden_dim = j.at("hidden_dim").get<std::uint32_t>();
    h.label_names = j.at("label_names").get<std::vector<std::string>>();
    h.dtype = j.at("dtype").get<std::string>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed header field: ") + e.what());
  }
  return h;
}

// ---------------------------------------------------------------------------
// Record

HiddenStateRecord::LayerView HiddenStateRecord::layer(std::uint32_t index) const {
  const std::size_t stride =
      static_cast<std::size_t>(num_tokens) * hidden_dim;
  return LayerView(tensor.data() + stride * index, num_tokens, hidden_dim);
}

void HiddenStateRecord::validate(const DumpHeader& header,
                                 std::uint64_t index) const {
  const auto fail = [&](const std::string& msg) {
    throw ValidationError(record_prefix(index) + msg);
  };
  if (num_layers != header.num_layers || hidden_dim != header.hidden_dim) {
    fail("shape (" + std::to_string(num_layers) + " layers, dim " +
         std::to_string(hidden_dim) + ") does not match header (" +
         std::to_string(header.num_layers) + " layers, dim " +
         std::to_string(header.hidden_dim) + ")");
  }
  if (word_ids.size() != num_tokens) {
    fail("word_ids has " + std::to_string(word_ids.size()) + " entries, expected " +
         std::to_string(num_tokens));
  }
  const auto expected_labels = label_count(header.task_type, num_words);
  if (labels.size() != expected_labels) {
    fail("labels has " + std::to_string(labels.size()) + " entries, expected " +
         std::to_string(expected_labels));
  }
  const std::uint64_t expected_values =
      static_cast<std::uint64_t>(num_layers) * num_tokens * hidden_dim;
  if (tensor.size() != expected_values) {
    fail("tensor has " + std::to_string(tensor.size()) + " values, expected " +
         std::to_string(expected_values));
  }

  // Word ids: non-decreasing over non-special positions, covering every word.
  std::int64_t next_word = 0;
  std::int64_t last = -1;
  for (std::uint32_t t = 0; t < num_tokens; ++t) {
    const std::int32_t w = word_ids[t];
    if (w == -1) continue;
    if (w < 0 || static_cast<std::uint32_t>(w) >= num_words) {
      fail("word id " + std::to_string(w) + " at token " + std::to_string(t) +
           " outside [0, " + std::to_string(num_words) + ")");
    }
    if (w < last) {
      fail("word ids decrease at token " + std::to_string(t));
    }
    if (w > next_word) {
      fail("word " + std::to_string(next_word) + " has no tokens");
    }
    if (w == next_word) ++next_word;
    last = w;
  }
  if (next_word != static_cast<std::int64_t>(num_words)) {
    fail("word " + std::to_string(next_word) + " has no tokens");
  }

  const auto num_labels = static_cast<std::int32_t>(header.label_names.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_labels) {
      fail("label " + std::to_string(labels[i]) + " outside [0, " +
           std::to_string(num_labels) + ")");
    }
  }
  for (std::size_t i = 0; i < tensor.size(); ++i) {
    if (!std::isfinite(tensor[i])) {
      fail("non-finite tensor value at flat offset " + std::to_string(i));
    }
  }
}

// ---------------------------------------------------------------------------
// Writer

DumpWriter::DumpWriter(std::ostream& sink, DumpHeader header)
    : sink_(&sink), header_(std::move(header)) {
  header_.validate();
  const std::string text = header_.to_json();
  put(kDumpMagic, 4);
  const auto version = to_little(kDumpVersion);
  put(&version, sizeof version);
  const auto length = to_little(static_cast<std::uint64_t>(text.size()));
  put(&length, sizeof length);
  put(text.data(), text.size());
}

void DumpWriter::put(const void* data, std::size_t size) {
  sink_->write(static_cast<const char*>(data),
               static_cast<std::streamsize>(size));
  if (!*sink_) throw IoError("write failed after " + std::to_string(bytes_) + " bytes");
  bytes_ += size;
}

void DumpWriter::write(const HiddenStateRecord& record) {
  if (written_ >= header_.num_items) {
    throw ValidationError(record_prefix(written_) + "header declares only " +
                          std::to_string(header_.num_items) + " items");
  }
  record.validate(header_, written_);

  const auto tokens = to_little(record.num_tokens);
  const auto words = to_little(record.num_words);
  put(&tokens, sizeof tokens);
  put(&words, sizeof words);

  if constexpr (std::endian::native == std::endian::little) {
    put(record.word_ids.data(), record.word_ids.size() * sizeof(std::int32_t));
    put(record.labels.data(), record.labels.size() * sizeof(std::int32_t));
    put(record.tensor.data(), record.tensor.size() * sizeof(float));
  } else {
    for (auto v : record.word_ids) { v = to_little(v); put(&v, sizeof v); }
    for (auto v : record.labels) { v = to_little(v); put(&v, sizeof v); }
    for (auto v : record.tensor) { v = to_little(v); put(&v, sizeof v); }
  }
  ++written_;
}

std::uint64_t DumpWriter::finish() {
  if (written_ != header_.num_items) {
    throw ValidationError("header declares " + std::to_string(header_.num_items) +
                          " items but " + std::to_string(written_) +
                          " records were written");
  }
  sink_->flush();
  if (!*sink_) throw IoError("flush failed");
  return bytes_;
}

std::uint64_t write_dump(const DumpHeader& header,
                         std::span<const HiddenStateRecord> records,
                         std::ostream& sink) {
  if (records.size() != header.num_items) {
    header.validate();
    throw ValidationError("header declares " + std::to_string(header.num_items) +
                          " items but " + std::to_string(records.size()) +
                          " records were given");
  }
  DumpWriter writer(sink, header);
  for (const auto& r : records) writer.write(r);
  return writer.finish();
}

// ---------------------------------------------------------------------------
// Reader

DumpReader::DumpReader(std::istream& source) : in_(&source) { read_preamble(); }

DumpReader::DumpReader(std::unique_ptr<std::istream> source)
    : owned_(std::move(source)), in_(owned_.get()) {
  read_preamble();
}

DumpReader DumpReader::open(const std::filesystem::path& path) {
  auto file = std::make_unique<std::ifstream>(path, std::ios::binary);
  if (!*file) throw IoError("cannot open '" + path.string() + "'");
  return DumpReader(std::move(file));
}

void DumpReader::read_preamble() {
  const auto start = in_->tellg();
  if (start != std::streampos(-1)) {
    in_->seekg(0, std::ios::end);
    const auto end = in_->tellg();
    in_->seekg(start);
    if (end != std::streampos(-1)) {
      total_size_ = static_cast<std::uint64_t>(end - start);
    }
  }

  char magic[4] = {};
  in_->read(magic, 4);
  const auto got = static_cast<std::size_t>(in_->gcount());
  if (got < 4 && std::memcmp(magic, kDumpMagic, got) == 0) {
    throw IoError("truncated magic at byte offset 0: expected 4 bytes, " +
                  std::to_string(got) + " available");
  }
  if (std::memcmp(magic, kDumpMagic, 4) != 0) {
    throw FormatError("not a TRDF file (bad magic)");
  }
  offset_ = 4;

  std::uint32_t version = 0;
  read_exact(&version, sizeof version, "header: version");
  version = to_little(version);
  if (version != kDumpVersion) {
    throw FormatError("unsupported TRDF version " + std::to_string(version));
  }
  std::uint64_t length = 0;
  read_exact(&length, sizeof length, "header: length");
  length = to_little(length);
  if (length > kMaxHeaderBytes) {
    throw FormatError("header length " + std::to_string(length) + " is implausible");
  }
  std::string text(length, '\0');
  read_exact(text.data(), text.size(), "header: json");
  header_ = DumpHeader::from_json(text);
  header_.validate();
  in_records_ = true;
}

void DumpReader::truncated(const char* field, std::uint64_t expected,
                           std::uint64_t available) const {
  // Messages are only assembled on failure; the happy path stays allocation-free.
  const std::string where =
      in_records_ ? record_prefix(position_) + field : std::string(field);
  throw IoError("truncated " + where + " at byte offset " + std::to_string(offset_) +
                ": expected " + std::to_string(expected) + " bytes, " +
                std::to_string(available) + " available");
}

void DumpReader::read_exact(void* data, std::size_t size, const char* what) {
  const auto got = static_cast<std::uint64_t>(
      in_->rdbuf()->sgetn(static_cast<char*>(data), static_cast<std::streamsize>(size)));
  if (got != size) truncated(what, size, got);
  offset_ += size;
}

std::pair<std::uint32_t, std::uint32_t> DumpReader::read_counts() {
  std::uint32_t counts[2] = {};
  const auto got = static_cast<std::uint64_t>(
      in_->rdbuf()->sgetn(reinterpret_cast<char*>(counts), sizeof counts));
  if (got < 4) truncated("num_tokens", 4, got);
  if (got < 8) {
    offset_ += 4;
    truncated("num_words", 4, got - 4);
  }
  offset_ += 8;
  return {to_little(counts[0]), to_little(counts[1])};
}

void DumpReader::advance(std::uint64_t size, const char* what) {
  if (total_size_) {
    const std::uint64_t available =
        offset_ <= *total_size_ ? *total_size_ - offset_ : 0;
    if (available < size) truncated(what, size, available);
    // Seeking drops the stream buffer, so short hops read through it.
    if (size <= kSeekThreshold) {
      in_->ignore(static_cast<std::streamsize>(size));
    } else {
      in_->seekg(static_cast<std::streamoff>(size), std::ios::cur);
    }
    offset_ += size;
    return;
  }
  in_->ignore(static_cast<std::streamsize>(size));
  const auto got = static_cast<std::uint64_t>(in_->gcount());
  if (got != size) truncated(what, size, got);
  offset_ += size;
}

void DumpReader::check_trailing() {
  if (position_ != header_.num_items) return;
  if (in_->peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing bytes after record " +
                      std::to_string(header_.num_items - 1) + " at byte offset " +
                      std::to_string(offset_));
  }
}

std::optional<HiddenStateRecord> DumpReader::next() {
  if (position_ >= header_.num_items) return std::nullopt;
  HiddenStateRecord r;
  r.num_layers = header_.num_layers;
  r.hidden_dim = header_.hidden_dim;
  std::tie(r.num_tokens, r.num_words) = read_counts();

  const std::uint64_t tensor_values =
      static_cast<std::uint64_t>(r.num_layers) * r.num_tokens * r.hidden_dim;
  const std::uint64_t label_values =
      HiddenStateRecord::label_count(header_.task_type, r.num_words);
  if (total_size_) {
    // Reject absurd sizes before allocating for them.
    const std::uint64_t need =
        4 * (static_cast<std::uint64_t>(r.num_tokens) + label_values + tensor_values);
    const std::uint64_t available =
        offset_ <= *total_size_ ? *total_size_ - offset_ : 0;
    if (need > available) truncated("payload", need, available);
  }

  r.word_ids.resize(r.num_tokens);
  read_exact(r.word_ids.data(), r.word_ids.size() * 4, "word_ids");
  r.labels.resize(label_values);
  read_exact(r.labels.data(), r.labels.size() * 4, "labels");
  r.tensor.resize(tensor_values);
  read_exact(r.tensor.data(), r.tensor.size() * 4, "tensor");
  swap_array_if_big(std::span(r.word_ids));
  swap_array_if_big(std::span(r.labels));
  swap_array_if_big(std::span(r.tensor));

  r.validate(header_, position_);
  ++position_;
  check_trailing();
  return r;
}

bool DumpReader::skip() {
  if (position_ >= header_.num_items) return false;
  const auto [tokens, words] = read_counts();
  const std::uint64_t values =
      tokens + HiddenStateRecord::label_count(header_.task_type, words) +
      static_cast<std::uint64_t>(header_.num_layers) * tokens * header_.hidden_dim;
  advance(values * 4, "payload");
  ++position_;
  check_trailing();
  return true;
}

std::pair<DumpHeader, std::vector<HiddenStateRecord>> read_dump(
    std::istream& source) {
  DumpReader reader(source);
  std::vector<HiddenStateRecord> records;
  while (auto r = reader.next()) records.push_back(std::move(*r));
  return {reader.header(), std::move(records)};
}

std::string dump_file_name(std::string_view model_name) {
  std::string out;
  out.reserve(model_name.size() + 5);
  for (const char c : model_name) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                      (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    out.push_back(keep ? c : '_');
  }
  if (out.empty() || out.front() == '.') out.insert(out.begin(), '_');
  return out + ".trdf";
}

}  // namespace transrank
