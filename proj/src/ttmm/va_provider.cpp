/**
 * @file va_provider.cpp
 */

#include "melotrans/ttmm/va_provider.hpp"

#include <unistd.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace melotrans::ttmm {
namespace {

std::map<std::string, VAPoint> builtin_lexicon() {
  return {
      {"happy", {2.0, 7.0}},      {"joyful", {1.8, 7.5}},   {"cheerful", {2.2, 6.8}}, {"excited", {2.5, 8.2}},
      {"energetic", {3.0, 8.5}},  {"triumphant", {2.0, 8.0}}, {"bright", {2.5, 6.0}},  {"love", {2.3, 5.5}},
      {"romantic", {3.0, 4.5}},   {"sweet", {2.5, 4.0}},    {"hopeful", {3.0, 5.0}},  {"calm", {4.0, 2.0}},
      {"peaceful", {3.5, 1.8}},   {"relaxed", {3.8, 2.2}},  {"gentle", {3.8, 2.8}},   {"dreamy", {4.5, 3.0}},
      {"epic", {4.0, 8.0}},       {"nostalgic", {6.0, 3.5}}, {"sad", {7.5, 2.5}},     {"melancholy", {7.0, 3.0}},
      {"lonely", {7.6, 2.8}},     {"gloomy", {7.8, 3.2}},   {"tired", {6.5, 1.5}},    {"bored", {6.0, 1.8}},
      {"dark", {7.2, 4.5}},       {"tense", {7.0, 7.5}},    {"anxious", {7.2, 7.2}},  {"fearful", {7.8, 7.8}},
      {"angry", {8.0, 8.5}},      {"furious", {8.5, 8.8}},
  };
}

VAPoint read_pair(const std::string& text, const std::string& who) {
  std::string cleaned = text;
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  std::istringstream in(cleaned);
  VAPoint va;
  std::string rest;
  if (!(in >> va.valence >> va.arousal) || (in >> rest)) {
    throw ProviderError(who + ": expected two numbers \"valence,arousal\", got \"" + text + "\"");
  }
  return va;
}

}  // namespace

void check_va(const VAPoint& va) {
  if (!(va.valence >= 1.0 && va.valence <= 9.0)) {
    throw RangeError("valence " + std::to_string(va.valence) + " outside [1,9]");
  }
  if (!(va.arousal > 0.0 && va.arousal <= 9.0)) {
    throw RangeError("arousal " + std::to_string(va.arousal) + " outside (0,9]");
  }
}

VAPoint parse_va(const std::string& text) {
  VAPoint va;
  try {
    va = read_pair(text, "va");
  } catch (const ProviderError& e) {
    throw std::invalid_argument(e.what());
  }
  check_va(va);
  return va;
}

BypassProvider::BypassProvider(VAPoint va) : va_(va) { check_va(va_); }

LexiconProvider::LexiconProvider() : table_(builtin_lexicon()) {}

LexiconProvider::LexiconProvider(std::map<std::string, VAPoint> table) : table_(std::move(table)) {
  for (const auto& [word, va] : table_) check_va(va);
}

LexiconProvider LexiconProvider::from_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProviderError("lexicon: cannot open " + path);
  std::map<std::string, VAPoint> table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string word;
    VAPoint va;
    if (!std::getline(row, word, '\t') || !(row >> va.valence >> va.arousal)) {
      throw ProviderError("lexicon: " + path + ":" + std::to_string(line_no) + ": expected word<TAB>valence<TAB>arousal");
    }
    std::transform(word.begin(), word.end(), word.begin(), [](unsigned char c) { return std::tolower(c); });
    try {
      check_va(va);
    } catch (const RangeError& e) {
      throw ProviderError("lexicon: " + path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    table[word] = va;
  }
  return LexiconProvider(std::move(table));
}

VAPoint LexiconProvider::predict(const std::string& text) const {
  double v = 0.0, a = 0.0;
  int hits = 0;
  std::string word;
  auto flush = [&] {
    if (auto it = table_.find(word); it != table_.end()) {
      v += it->second.valence;
      a += it->second.arousal;
      ++hits;
    }
    word.clear();
  };
  for (unsigned char c : text) {
    if (std::isalpha(c) || c == '\'') {
      word.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  if (hits == 0) return {5.0, 5.0};
  return {v / hits, a / hits};
}

VAPoint ExternalProvider::predict(const std::string& text) const {
  char path[] = "/tmp/melotrans-va-XXXXXX";
  const int fd = mkstemp(path);
  if (fd < 0) throw ProviderError("external: cannot create a temporary file");
  {
    std::ofstream out(path);
    out << text;
  }
  close(fd);
  const std::string cmd = "(" + command_ + ") < '" + path + "'";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) {
    std::remove(path);
    throw ProviderError("external: cannot run \"" + command_ + "\"");
  }
  std::string output;
  std::array<char, 256> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) output += buf.data();
  const int status = pclose(pipe);
  std::remove(path);
  if (status != 0) {
    throw ProviderError("external: \"" + command_ + "\" exited with status " + std::to_string(status));
  }
  return read_pair(output, "external");
}

VAPoint text_to_va(const VAProvider& provider, const std::string& text) {
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
    throw std::invalid_argument("text is empty");
  }
  VAPoint va;
  try {
    va = provider.predict(text);
  } catch (const ProviderError&) {
    throw;
  } catch (const std::exception& e) {
    throw ProviderError(provider.name() + ": " + e.what());
  }
  try {
    check_va(va);
  } catch (const RangeError& e) {
    throw ProviderError(provider.name() + ": " + e.what());
  }
  return va;
}

}  // namespace melotrans::ttmm
