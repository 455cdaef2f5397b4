// tools/cli.hpp
//
// Copyright 2026  The surt-toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SURT_TOOLS_CLI_HPP_
#define SURT_TOOLS_CLI_HPP_

#include <cstddef>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "surt/corpus.hpp"

namespace surt::cli {

enum ExitCode : int {
  kOk = 0,
  kValidationError = 1,
  kIoError = 2,
  kUsage = 64,
};

// Runs one subcommand. argv[0] is the program name.
int Dispatch(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

// A scoring/HEAT unit: utterances on one timeline, in start order. Read from
// either manifest lines ({"id", "segments"}) or mixture lines
// ({"id", "entries"}).
struct Session {
  std::string id;
  std::vector<Segment> utterances;
};

std::vector<Session> ReadSessions(const std::string &path);

// {"id", "channels"} lines, keyed by id in file order.
struct Hypothesis {
  std::string id;
  std::vector<TokenSequence> channels;
};
std::vector<Hypothesis> ReadHypotheses(const std::string &path);

// Replaces `path` with `content` via a temporary file and rename(2).
void WriteFileAtomic(const std::string &path, const std::string &content);

// Runs fn(i) for i in [0, n) on up to `jobs` threads and returns results in
// index order. The lowest-index exception is rethrown.
template <typename Result>
std::vector<Result> ParallelMap(std::size_t n, int jobs, const std::function<Result(std::size_t)> &fn);

int DefaultJobs();

}  // namespace surt::cli

#include "parallel.ipp"

#endif  // SURT_TOOLS_CLI_HPP_
