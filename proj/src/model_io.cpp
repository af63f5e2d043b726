#include "wordseg/model_io.hpp"

#include <cstring>
#include <fstream>

namespace wordseg {

namespace {

constexpr char kMagic[4] = {'W', 'S', 'E', 'G'};
constexpr std::uint32_t kVersion = 1;
constexpr const char* kGateOrder = "input,forget,cell,output";

std::uint64_t fnv1a(const unsigned char* data, std::size_t len) {
  std::uint64_t h = 14695981039346656037ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= data[i];
    h *= 1099511628211ull;
  }
  return h;
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

void append_f64le(std::string& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(out, bits);
}

double read_f64le(const unsigned char* p) {
  std::uint64_t bits = get_u64(p);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

nlohmann::json tensor_listing(const ModelParams& p) {
  nlohmann::json listing = nlohmann::json::array();
  p.for_each_tensor([&](const std::string& name, const Tensor& t) {
    nlohmann::json entry;
    entry["name"] = name;
    entry["shape"] = t.rank() == 1 ? nlohmann::json::array({t.rows()})
                                   : nlohmann::json::array({t.rows(), t.cols()});
    listing.push_back(entry);
  });
  return listing;
}

}  // namespace

void save_model(const ModelBundle& bundle, const std::string& path) {
  const ModelParams& p = bundle.params;
  if (!p.all_finite()) throw ContractError("save_model: parameters contain non-finite values");

  nlohmann::json meta;
  meta["format"] = "wordseg-model";
  meta["version"] = kVersion;
  meta["dims"] = {{"d_c", p.dims.d_c},
                  {"d_w", p.dims.d_w},
                  {"hidden", p.dims.hidden},
                  {"max_word_len", p.dims.max_word_len}};
  meta["gate_order"] = kGateOrder;
  {
    nlohmann::json chars = nlohmann::json::array();
    nlohmann::json freqs = nlohmann::json::array();
    for (int id = 0; id < bundle.vocab.size(); ++id) {
      chars.push_back(bundle.vocab.char_at(id));
      freqs.push_back(bundle.vocab.freq(id));
    }
    meta["vocab"] = {{"chars", chars},
                     {"freq", freqs},
                     {"unk_threshold", bundle.vocab.unk_threshold()}};
  }
  meta["shortlist"] = {{"words", bundle.shortlist.words()},
                       {"fraction", bundle.shortlist.fraction()}};
  meta["seed"] = bundle.seed;
  meta["normalize_ascii"] = bundle.normalize_ascii;
  meta["provenance"] = bundle.provenance.is_null() ? nlohmann::json::object() : bundle.provenance;
  meta["tensors"] = tensor_listing(p);

  const std::string meta_str = meta.dump();

  std::string payload;
  payload.reserve(static_cast<std::size_t>(p.param_count()) * 8);
  p.for_each_tensor([&](const std::string&, const Tensor& t) {
    for (std::size_t i = 0; i < t.numel(); ++i) append_f64le(payload, t[i]);
  });

  std::string header;
  header.append(kMagic, 4);
  put_u32(header, kVersion);
  put_u64(header, meta_str.size());
  put_u64(header, payload.size());
  put_u64(header, fnv1a(reinterpret_cast<const unsigned char*>(payload.data()), payload.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << header << meta_str << payload;
  if (!out) throw IoError("write failed on " + path);
}

ModelBundle load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed on " + path);
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());

  if (bytes.size() < 32 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError(path + ": not a wordseg model file");
  }
  const std::uint32_t version = get_u32(data + 4);
  if (version != kVersion) {
    throw VersionError(path + ": model format version " + std::to_string(version) +
                       " is not supported (expected " + std::to_string(kVersion) + ")");
  }
  const std::uint64_t meta_len = get_u64(data + 8);
  const std::uint64_t payload_len = get_u64(data + 16);
  const std::uint64_t checksum = get_u64(data + 24);
  if (bytes.size() != 32 + meta_len + payload_len) {
    throw IntegrityError(path + ": file length " + std::to_string(bytes.size()) +
                         " does not match declared " + std::to_string(32 + meta_len + payload_len));
  }
  if (fnv1a(data + 32 + meta_len, payload_len) != checksum) {
    throw IntegrityError(path + ": payload checksum mismatch");
  }

  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(bytes.begin() + 32, bytes.begin() + 32 + meta_len);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": bad metadata: " + e.what());
  }

  ModelBundle bundle;
  try {
    ModelDims dims;
    dims.d_c = meta.at("dims").at("d_c").get<int>();
    dims.d_w = meta.at("dims").at("d_w").get<int>();
    dims.hidden = meta.at("dims").at("hidden").get<int>();
    dims.max_word_len = meta.at("dims").at("max_word_len").get<int>();

    bundle.vocab = CharVocab::from_entries(
        meta.at("vocab").at("chars").get<std::vector<std::string>>(),
        meta.at("vocab").at("freq").get<std::vector<std::uint64_t>>(),
        meta.at("vocab").at("unk_threshold").get<std::uint64_t>());
    bundle.shortlist =
        ShortList::from_words(meta.at("shortlist").at("words").get<std::vector<std::string>>(),
                              meta.at("shortlist").at("fraction").get<double>());
    bundle.seed = meta.at("seed").get<std::uint64_t>();
    bundle.normalize_ascii = meta.at("normalize_ascii").get<bool>();
    bundle.provenance = meta.at("provenance");

    bundle.params = init_params(dims, bundle.vocab.size(), bundle.shortlist.size(), 0);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": bad metadata: " + e.what());
  }

  // The declared listing must match the canonical tensor order bit for bit.
  const nlohmann::json expected = tensor_listing(bundle.params);
  if (meta.at("tensors") != expected) {
    throw FormatError(path + ": tensor listing does not match the canonical order");
  }

  std::uint64_t expected_payload = 0;
  bundle.params.for_each_tensor(
      [&](const std::string&, const Tensor& t) { expected_payload += t.numel() * 8; });
  if (expected_payload != payload_len) {
    throw IntegrityError(path + ": payload holds " + std::to_string(payload_len) +
                         " bytes, tensors need " + std::to_string(expected_payload));
  }

  const unsigned char* cursor = data + 32 + meta_len;
  bundle.params.for_each_tensor([&](const std::string&, Tensor& t) {
    for (std::size_t i = 0; i < t.numel(); ++i) {
      t[i] = read_f64le(cursor);
      cursor += 8;
    }
  });
  return bundle;
}

nlohmann::json model_info(const ModelBundle& bundle) {
  const ModelParams& p = bundle.params;
  nlohmann::json info;
  info["dims"] = {{"d_c", p.dims.d_c},
                  {"d_w", p.dims.d_w},
                  {"hidden", p.dims.hidden},
                  {"max_word_len", p.dims.max_word_len}};
  info["gate_order"] = kGateOrder;
  info["vocab_size"] = bundle.vocab.size();
  info["shortlist_size"] = bundle.shortlist.size();
  info["shortlist_fraction"] = bundle.shortlist.fraction();
  info["seed"] = bundle.seed;
  info["normalize_ascii"] = bundle.normalize_ascii;
  info["param_count"] = p.param_count();
  info["provenance"] = bundle.provenance.is_null() ? nlohmann::json::object() : bundle.provenance;
  return info;
}

}  // namespace wordseg
