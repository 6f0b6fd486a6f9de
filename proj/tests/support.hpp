#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "sesmon/analysis.hpp"
#include "sesmon/parser.hpp"

#ifndef SESMON_CORPUS_DIR
#define SESMON_CORPUS_DIR "corpus"
#endif

namespace testing {

inline std::string corpusText(const std::string& name) {
  std::ifstream in(std::string(SESMON_CORPUS_DIR) + "/" + name + ".proc");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline sesmon::Program corpus(const std::string& name, const sesmon::Choices& ch = {}) {
  return sesmon::parseProgram(corpusText(name), ch);
}

inline const char* kCorpus[] = {"medical", "example1", "example2", "example2_q", "example3", "example3_unlevelled",
                                "example5", "sibling", "monitors4", "linkjoin", "servicelevels", "servicelevels_top",
                                "nil"};

}  // namespace testing
