#include "phonemt/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "phonemt/rng.hpp"
#include "phonemt/utf8.hpp"

namespace phonemt {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw CorpusError(CorpusError::Kind::FileNotFound, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::vector<std::string> tokenize_whitespace(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

ParallelCorpus load_parallel(const std::filesystem::path& source_path,
                             const std::filesystem::path& target_path,
                             std::string source_lang, std::string target_lang,
                             LoadReport* report) {
  const auto source_lines = read_lines(source_path);
  const auto target_lines = read_lines(target_path);
  if (source_lines.size() != target_lines.size())
    throw CorpusError(CorpusError::Kind::LengthMismatch,
                      "line count mismatch: " + source_path.string() + " has " +
                          std::to_string(source_lines.size()) + ", " +
                          target_path.string() + " has " +
                          std::to_string(target_lines.size()));
  ParallelCorpus corpus;
  corpus.source_lang = std::move(source_lang);
  corpus.target_lang = std::move(target_lang);
  for (std::size_t i = 0; i < source_lines.size(); ++i) {
    if (trim(source_lines[i]).empty() || trim(target_lines[i]).empty()) {
      if (report) ++report->dropped_empty;
      continue;
    }
    corpus.pairs.push_back({source_lines[i], target_lines[i], i + 1});
  }
  return corpus;
}

ParallelCorpus phonemize_corpus(const ParallelCorpus& corpus, G2pBackend& source_backend,
                                G2pBackend& target_backend, int workers,
                                PhonemizeReport* report) {
  if (corpus.representation != Representation::Graphemic)
    throw CorpusError(CorpusError::Kind::WrongRepresentation,
                      "phonemize_corpus expects a graphemic corpus");
  std::vector<std::string> sources, targets;
  sources.reserve(corpus.size());
  targets.reserve(corpus.size());
  for (const auto& p : corpus.pairs) {
    sources.push_back(p.source);
    targets.push_back(p.target);
  }
  StreamResult src = source_backend.phonemize_stream(sources, workers);
  StreamResult tgt = target_backend.phonemize_stream(targets, workers);

  std::vector<char> bad(corpus.size(), 0);
  for (const auto& e : src.errors) bad[e.line_number - 1] = 1;
  for (const auto& e : tgt.errors) bad[e.line_number - 1] = 1;

  ParallelCorpus out;
  out.source_lang = corpus.source_lang;
  out.target_lang = corpus.target_lang;
  out.representation = Representation::Phonemic;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (bad[i] || src.outputs[i].empty() || tgt.outputs[i].empty()) {
      if (report) ++report->dropped_pairs;
      continue;
    }
    out.pairs.push_back({src.outputs[i], tgt.outputs[i], corpus.pairs[i].origin_line});
  }
  if (report) {
    auto attribute = [&](const std::vector<LineError>& errors) {
      for (const auto& e : errors)
        report->errors.push_back({corpus.pairs[e.line_number - 1].origin_line, e.message});
    };
    attribute(src.errors);
    attribute(tgt.errors);
    report->source_summary = src.summary;
    report->target_summary = tgt.summary;
  }
  return out;
}

std::pair<ParallelCorpus, ParallelCorpus> split_corpus(const ParallelCorpus& corpus,
                                                       double train_fraction,
                                                       std::uint64_t seed) {
  if (corpus.size() < 2)
    throw CorpusError(CorpusError::Kind::TooSmall, "need at least 2 pairs to split");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("train_fraction must be in (0, 1)");
  const std::size_t n = corpus.size();
  const auto train_size =
      static_cast<std::size_t>(std::ceil(train_fraction * static_cast<double>(n)));
  if (train_size == 0 || train_size >= n)
    throw CorpusError(CorpusError::Kind::TooSmall, "split would leave an empty partition");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  auto make_part = [&](std::size_t begin, std::size_t end) {
    ParallelCorpus part;
    part.source_lang = corpus.source_lang;
    part.target_lang = corpus.target_lang;
    part.representation = corpus.representation;
    for (std::size_t i = begin; i < end; ++i) part.pairs.push_back(corpus.pairs[order[i]]);
    return part;
  };
  return {make_part(0, train_size), make_part(train_size, n)};
}

ParallelCorpus filter_pairs(const ParallelCorpus& corpus, std::size_t max_len,
                            double ratio_cap, FilterReport* report) {
  if (max_len < 1) throw std::invalid_argument("max_len must be >= 1");
  if (ratio_cap < 1.0) throw std::invalid_argument("ratio_cap must be >= 1");
  ParallelCorpus out;
  out.source_lang = corpus.source_lang;
  out.target_lang = corpus.target_lang;
  out.representation = corpus.representation;
  for (const auto& p : corpus.pairs) {
    const auto s = tokenize_whitespace(p.source).size();
    const auto t = tokenize_whitespace(p.target).size();
    if (s > max_len || t > max_len) {
      if (report) ++report->dropped_too_long;
      continue;
    }
    const double ratio = static_cast<double>(std::max(s, t)) /
                         static_cast<double>(std::max<std::size_t>(1, std::min(s, t)));
    if (ratio > ratio_cap) {
      if (report) ++report->dropped_ratio;
      continue;
    }
    out.pairs.push_back(p);
  }
  return out;
}

void write_corpus(const ParallelCorpus& corpus, const std::filesystem::path& source_path,
                  const std::filesystem::path& target_path) {
  auto write_side = [](const std::filesystem::path& path, auto&& getter,
                       const ParallelCorpus& c) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
      throw CorpusError(CorpusError::Kind::IoError, "cannot write " + path.string());
    for (const auto& p : c.pairs) out << getter(p) << '\n';
    if (!out)
      throw CorpusError(CorpusError::Kind::IoError, "write failed: " + path.string());
  };
  write_side(source_path, [](const ParallelPair& p) -> const std::string& { return p.source; },
             corpus);
  write_side(target_path, [](const ParallelPair& p) -> const std::string& { return p.target; },
             corpus);
}

CorpusStats corpus_stats(const ParallelCorpus& corpus) {
  CorpusStats stats;
  stats.pair_count = corpus.size();
  std::set<char32_t> source_symbols, target_symbols;
  for (const auto& p : corpus.pairs) {
    const auto src_tokens = tokenize_whitespace(p.source).size();
    stats.source_tokens += src_tokens;
    stats.target_tokens += tokenize_whitespace(p.target).size();
    for (char32_t c : utf8::decode(p.source))
      if (!utf8::is_whitespace(c)) source_symbols.insert(c);
    for (char32_t c : utf8::decode(p.target))
      if (!utf8::is_whitespace(c)) target_symbols.insert(c);
    const std::size_t bucket = src_tokens == 0 ? 0 : (src_tokens - 1) / CorpusStats::bucket_width;
    if (stats.length_histogram.size() <= bucket) stats.length_histogram.resize(bucket + 1, 0);
    ++stats.length_histogram[bucket];
  }
  stats.source_distinct_symbols = source_symbols.size();
  stats.target_distinct_symbols = target_symbols.size();
  return stats;
}

std::string CorpusStats::to_text() const {
  std::ostringstream os;
  os << "pairs\t" << pair_count << '\n'
     << "source_tokens\t" << source_tokens << '\n'
     << "target_tokens\t" << target_tokens << '\n'
     << "source_distinct_symbols\t" << source_distinct_symbols << '\n'
     << "target_distinct_symbols\t" << target_distinct_symbols << '\n';
  for (std::size_t i = 0; i < length_histogram.size(); ++i)
    os << "length_" << (i * bucket_width + 1) << '_' << ((i + 1) * bucket_width) << '\t'
       << length_histogram[i] << '\n';
  return os.str();
}

}  // namespace phonemt
