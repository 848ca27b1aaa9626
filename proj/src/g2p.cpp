#include "phonemt/g2p.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include "phonemt/utf8.hpp"

namespace phonemt {

namespace {

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// 128-bit content hash (two independent 64-bit lanes), hex encoded.
std::string content_hash(std::string_view s) {
  std::uint64_t h1 = 1469598103934665603ULL;
  std::uint64_t h2 = 0x9E3779B97F4A7C15ULL;
  for (unsigned char c : s) {
    h1 = (h1 ^ c) * 1099511628211ULL;
    h2 ^= c + 0x9E3779B97F4A7C15ULL + (h2 << 6) + (h2 >> 2);
  }
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(h1),
                static_cast<unsigned long long>(h2));
  return buf;
}

std::string hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "absent";
  std::ostringstream ss;
  ss << in.rdbuf();
  return content_hash(ss.str());
}

std::string escape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      ++i;
      switch (s[i]) {
        case 't': out.push_back('\t'); break;
        case 'n': out.push_back('\n'); break;
        default: out.push_back(s[i]);
      }
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- lexicon

const std::string* Lexicon::lookup(std::string_view word) const {
  auto it = entries.find(utf8::to_lower_copy(word));
  return it == entries.end() ? nullptr : &it->second;
}

Lexicon load_lexicon(const std::filesystem::path& path, std::string language) {
  std::ifstream in(path);
  if (!in)
    throw G2pError(G2pError::Kind::FileNotFound, "lexicon not found: " + path.string());
  Lexicon lex;
  lex.language = std::move(language);
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw G2pError(G2pError::Kind::MalformedLine,
                     path.string() + ":" + std::to_string(line_number) +
                         ": missing tab separator",
                     line_number);
    std::string key = utf8::to_lower_copy(std::string_view(line).substr(0, tab));
    std::string value = line.substr(tab + 1);
    if (key.empty() || key.find(' ') != std::string::npos ||
        key.find('\t') != std::string::npos)
      throw G2pError(G2pError::Kind::MalformedLine,
                     path.string() + ":" + std::to_string(line_number) +
                         ": key is empty or contains whitespace",
                     line_number);
    try {
      tokenize_strict(value);
    } catch (const PhonemeError& e) {
      throw G2pError(G2pError::Kind::InvalidPhonemes,
                     path.string() + ":" + std::to_string(line_number) + ": " + e.what(),
                     line_number);
    }
    if (lex.entries.count(key)) ++lex.duplicate_warnings;
    lex.entries[key] = std::move(value);
  }
  return lex;
}

// ------------------------------------------------------------ rule table

void RuleTable::add(std::string_view pattern, std::string_view phonemes) {
  Rule r;
  r.pattern = utf8::decode(utf8::to_lower_copy(pattern));
  if (r.pattern.empty())
    throw G2pError(G2pError::Kind::MalformedLine, "empty rule pattern");
  r.phonemes = std::string(phonemes);
  tokenize_strict(r.phonemes);
  // Keep sorted by decreasing length so match_at scans longest first; stable
  // within a length class.
  auto pos = std::find_if(rules_.begin(), rules_.end(), [&](const Rule& other) {
    return other.pattern.size() < r.pattern.size();
  });
  rules_.insert(pos, std::move(r));
}

RuleTable RuleTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw G2pError(G2pError::Kind::FileNotFound, "rule table not found: " + path.string());
  RuleTable table;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw G2pError(G2pError::Kind::MalformedLine,
                     path.string() + ":" + std::to_string(line_number) +
                         ": missing tab separator",
                     line_number);
    try {
      table.add(std::string_view(line).substr(0, tab),
                std::string_view(line).substr(tab + 1));
    } catch (const PhonemeError& e) {
      throw G2pError(G2pError::Kind::InvalidPhonemes,
                     path.string() + ":" + std::to_string(line_number) + ": " + e.what(),
                     line_number);
    }
  }
  return table;
}

int RuleTable::match_at(const std::u32string& word, std::size_t pos) const {
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const auto& pat = rules_[i].pattern;
    if (pat.size() > word.size() - pos) continue;
    if (std::equal(pat.begin(), pat.end(), word.begin() + pos))
      return static_cast<int>(i);
  }
  return -1;
}

std::string phonemize_word(std::string_view word, const Lexicon& lexicon,
                           const RuleTable& rules, ParseMode mode) {
  if (const std::string* hit = lexicon.lookup(word)) return *hit;
  const std::u32string scalars = utf8::decode(utf8::to_lower_copy(word));
  std::string out;
  std::size_t pos = 0;
  while (pos < scalars.size()) {
    const int rule = rules.match_at(scalars, pos);
    if (rule >= 0) {
      out += rules.phonemes(rule);
      pos += rules.pattern_length(rule);
    } else if (mode == ParseMode::Permissive) {
      out += utf8::encode(scalars[pos]);
      ++pos;
    } else {
      throw G2pError(G2pError::Kind::NoRuleApplies,
                     "no lexicon entry or rule covers '" + utf8::encode(scalars[pos]) +
                         "' in word '" + std::string(word) + "'");
    }
  }
  if (mode == ParseMode::Strict) tokenize_strict(out);
  return out;
}

// ---------------------------------------------------------------- cache

class G2pCache {
 public:
  G2pCache(const std::filesystem::path& dir, const std::string& language,
           const std::string& backend_version) {
    std::filesystem::create_directories(dir);
    std::string name = "g2p-";
    for (char c : language) name.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    file_ = dir / (name + ".cache");
    header_ = std::string(kMagic) + "\t" + backend_version;
    load_or_reset();
    append_.open(file_, std::ios::app);
  }

  bool get(const std::string& line, std::string* out) {
    const std::string key = content_hash(line);
    std::lock_guard<std::mutex> lock(mu_);
    auto it = index_.find(key);
    if (it == index_.end()) return false;
    *out = it->second;
    return true;
  }

  void put(const std::string& language, const std::string& line, const std::string& out) {
    const std::string key = content_hash(line);
    std::lock_guard<std::mutex> lock(mu_);
    if (!index_.emplace(key, out).second) return;
    append_ << escape_field(language) << '\t' << key << '\t' << escape_field(out) << '\n';
    append_.flush();
  }

 private:
  static constexpr const char* kMagic = "#phonemt-g2p-cache\tv1";

  void load_or_reset() {
    std::ifstream in(file_);
    if (!in) {
      write_header();
      return;
    }
    std::string line;
    if (!std::getline(in, line) || line != header_) {
      // Backend changed or the file is foreign: entries are no longer
      // trustworthy, start over.
      in.close();
      write_header();
      return;
    }
    while (std::getline(in, line)) {
      const auto t1 = line.find('\t');
      if (t1 == std::string::npos) continue;
      const auto t2 = line.find('\t', t1 + 1);
      if (t2 == std::string::npos) continue;
      index_[line.substr(t1 + 1, t2 - t1 - 1)] = unescape_field(line.substr(t2 + 1));
    }
  }

  void write_header() {
    index_.clear();
    std::ofstream out(file_, std::ios::trunc);
    out << header_ << '\n';
  }

  std::filesystem::path file_;
  std::string header_;
  std::unordered_map<std::string, std::string> index_;
  std::mutex mu_;
  std::ofstream append_;
};

// ------------------------------------------------------- child processes

namespace {

void write_all(int fd, const char* data, std::size_t n) {
  while (n > 0) {
    const ssize_t w = ::write(fd, data, n);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw G2pError(G2pError::Kind::BackendUnavailable,
                     std::string("write to phonemizer failed: ") + std::strerror(errno));
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

class LineProcess {
 public:
  explicit LineProcess(const std::vector<std::string>& argv) {
    int in_pipe[2], out_pipe[2], status_pipe[2];
    if (::pipe(in_pipe) || ::pipe(out_pipe) || ::pipe(status_pipe))
      throw G2pError(G2pError::Kind::BackendUnavailable, "pipe() failed");
    ::fcntl(status_pipe[1], F_SETFD, FD_CLOEXEC);

    pid_ = ::fork();
    if (pid_ < 0)
      throw G2pError(G2pError::Kind::BackendUnavailable, "fork() failed");
    if (pid_ == 0) {
      ::dup2(in_pipe[0], STDIN_FILENO);
      ::dup2(out_pipe[1], STDOUT_FILENO);
      ::close(in_pipe[0]);
      ::close(in_pipe[1]);
      ::close(out_pipe[0]);
      ::close(out_pipe[1]);
      ::close(status_pipe[0]);
      std::vector<char*> cargv;
      cargv.reserve(argv.size() + 1);
      for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
      cargv.push_back(nullptr);
      ::execvp(cargv[0], cargv.data());
      const int err = errno;
      [[maybe_unused]] ssize_t ignored = ::write(status_pipe[1], &err, sizeof err);
      ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    ::close(status_pipe[1]);
    in_fd_ = in_pipe[1];
    out_fd_ = out_pipe[0];

    int exec_errno = 0;
    const ssize_t got = ::read(status_pipe[0], &exec_errno, sizeof exec_errno);
    ::close(status_pipe[0]);
    if (got > 0) {
      close_fds();
      ::waitpid(pid_, nullptr, 0);
      pid_ = -1;
      throw G2pError(G2pError::Kind::BackendUnavailable,
                     "cannot spawn '" + argv[0] + "': " + std::strerror(exec_errno));
    }
  }

  ~LineProcess() {
    close_fds();
    if (pid_ > 0) {
      // Stdin EOF usually ends the child; escalate if it lingers.
      for (int i = 0; i < 50; ++i) {
        if (::waitpid(pid_, nullptr, WNOHANG) > 0) return;
        ::usleep(10000);
      }
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
    }
  }

  std::string exchange(const std::string& line, int timeout_ms = 30000) {
    const std::string payload = line + "\n";
    write_all(in_fd_, payload.data(), payload.size());
    return read_line(timeout_ms);
  }

  std::string read_line(int timeout_ms) {
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      struct pollfd pfd = {out_fd_, POLLIN, 0};
      const int pr = ::poll(&pfd, 1, timeout_ms);
      if (pr <= 0)
        throw G2pError(G2pError::Kind::BackendUnavailable,
                       "phonemizer did not respond within timeout");
      char chunk[4096];
      const ssize_t r = ::read(out_fd_, chunk, sizeof chunk);
      if (r < 0) {
        if (errno == EINTR) continue;
        throw G2pError(G2pError::Kind::BackendUnavailable,
                       std::string("read from phonemizer failed: ") + std::strerror(errno));
      }
      if (r == 0)
        throw G2pError(G2pError::Kind::BackendUnavailable,
                       "phonemizer closed its output stream");
      buffer_.append(chunk, static_cast<std::size_t>(r));
    }
  }

  void close_stdin() {
    if (in_fd_ >= 0) ::close(in_fd_);
    in_fd_ = -1;
  }

 private:
  void close_fds() {
    close_stdin();
    if (out_fd_ >= 0) ::close(out_fd_);
    out_fd_ = -1;
  }

  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  std::string buffer_;
};

std::string query_command_version(const std::string& program) {
  try {
    LineProcess proc({program, "--version"});
    proc.close_stdin();
    std::string line = proc.read_line(2000);
    return line.empty() ? "unknown" : line;
  } catch (const G2pError&) {
    return "unknown";
  }
}

}  // namespace

class LineProcessPool {
 public:
  explicit LineProcessPool(std::vector<std::string> argv) : argv_(std::move(argv)) {}

  std::string exchange(int worker_index, const std::string& line) {
    Slot& slot = acquire(worker_index);
    std::lock_guard<std::mutex> lock(slot.mu);
    if (!slot.proc) slot.proc = std::make_unique<LineProcess>(argv_);
    return slot.proc->exchange(line);
  }

 private:
  struct Slot {
    std::mutex mu;
    std::unique_ptr<LineProcess> proc;
  };

  Slot& acquire(int worker_index) {
    std::lock_guard<std::mutex> lock(grow_mu_);
    while (static_cast<int>(slots_.size()) <= worker_index)
      slots_.push_back(std::make_unique<Slot>());
    return *slots_[worker_index];
  }

  std::vector<std::string> argv_;
  std::mutex grow_mu_;
  std::vector<std::unique_ptr<Slot>> slots_;
};

// --------------------------------------------------------------- backend

void G2pBackendSpec::validate() const {
  if (kind == G2pBackendKind::LexiconRules && lexicon_path.empty())
    throw G2pError(G2pError::Kind::BadSpec, "LexiconRules backend requires lexicon_path");
  if (kind == G2pBackendKind::ExternalCommand && command.empty())
    throw G2pError(G2pError::Kind::BadSpec, "ExternalCommand backend requires a command");
}

std::vector<std::string> G2pBackendSpec::default_espeak_command(const std::string& language) {
  return {"espeak-ng", "-q", "--ipa", "-v", language};
}

G2pBackend::G2pBackend(G2pBackendSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.kind == G2pBackendKind::LexiconRules) {
    lexicon_ = load_lexicon(spec_.lexicon_path, spec_.language);
    if (!spec_.rules_path.empty()) rules_ = RuleTable::load(spec_.rules_path);
    version_ = "lexicon-rules:" + hash_file(spec_.lexicon_path) + ":" +
               (spec_.rules_path.empty() ? "none" : hash_file(spec_.rules_path));
  } else {
    pool_ = std::make_unique<LineProcessPool>(spec_.command);
    version_ = spec_.command[0] + ":" + query_command_version(spec_.command[0]);
  }
  if (!spec_.cache_dir.empty())
    cache_ = std::make_unique<G2pCache>(spec_.cache_dir, spec_.language, version_);
}

G2pBackend::~G2pBackend() = default;

std::string G2pBackend::phonemize_uncached(const std::string& line, int worker_index) {
  const std::string stripped = strip_punctuation(line);
  if (stripped.empty()) return "";
  backend_calls_.fetch_add(1, std::memory_order_relaxed);
  if (spec_.kind == G2pBackendKind::ExternalCommand) {
    std::string out = pool_->exchange(worker_index, stripped);
    // espeak-ng indents its output and may echo multiple spaces.
    std::string collapsed;
    bool pending = false;
    for (char c : out) {
      if (c == ' ' || c == '\t') {
        pending = !collapsed.empty();
        continue;
      }
      if (pending) collapsed.push_back(' ');
      pending = false;
      collapsed.push_back(c);
    }
    return collapsed;
  }
  std::vector<std::string> result;
  for (const auto& word : split_words(stripped)) {
    std::string phonemes = phonemize_word(word, lexicon_, rules_, spec_.mode);
    if (!phonemes.empty()) result.push_back(std::move(phonemes));
  }
  std::string joined;
  for (std::size_t i = 0; i < result.size(); ++i) {
    if (i) joined += ' ';
    joined += result[i];
  }
  return joined;
}

std::string G2pBackend::phonemize_line(const std::string& line) {
  std::string out;
  if (cache_ && cache_->get(line, &out)) {
    cache_hits_.fetch_add(1, std::memory_order_relaxed);
    return out;
  }
  out = phonemize_uncached(line, 0);
  if (cache_) cache_->put(spec_.language, line, out);
  return out;
}

StreamResult G2pBackend::phonemize_stream(const std::vector<std::string>& lines,
                                          int workers, std::size_t error_threshold) {
  if (workers < 1) workers = 1;
  const std::size_t hits_before = cache_hits_.load();
  const std::size_t calls_before = backend_calls_.load();
  StreamResult result;
  result.outputs.resize(lines.size());
  std::vector<std::string> slot_errors(lines.size());
  std::vector<char> failed(lines.size(), 0);

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> error_count{0};
  std::atomic<bool> stop{false};

  auto work = [&](int worker_index) {
    for (;;) {
      if (stop.load(std::memory_order_relaxed)) return;
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= lines.size()) return;
      std::string out;
      if (cache_ && cache_->get(lines[i], &out)) {
        cache_hits_.fetch_add(1, std::memory_order_relaxed);
        result.outputs[i] = std::move(out);
        continue;
      }
      try {
        out = phonemize_uncached(lines[i], worker_index);
      } catch (const std::exception& e) {
        failed[i] = 1;
        slot_errors[i] = e.what();
        if (error_count.fetch_add(1) + 1 >= error_threshold) stop.store(true);
        continue;
      }
      if (cache_) cache_->put(spec_.language, lines[i], out);
      result.outputs[i] = std::move(out);
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }

  result.summary.lines = lines.size();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (failed[i]) {
      result.errors.push_back({i + 1, slot_errors[i]});
      ++result.summary.errors;
    }
  }
  result.summary.aborted = stop.load();
  result.summary.cache_hits = cache_hits_.load() - hits_before;
  result.summary.backend_calls = backend_calls_.load() - calls_before;
  return result;
}

}  // namespace phonemt
