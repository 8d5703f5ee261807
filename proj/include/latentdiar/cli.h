// latentdiar/cli.h
//
// Copyright 2026  The latentdiar Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Command-line front end: one binary, several subcommands.
//
//   latentdiar synth   --out-dir D [--seed S] ...
//   latentdiar train   --embeddings E.emb --labels L.txt --out-dir D ...
//   latentdiar diarize --model M.ckpt --embeddings E.emb ... --out-dir D
//   latentdiar score   --ref R.rttm --hyp H.rttm [--collar 0.25]
//   latentdiar export-embeddings --model M.ckpt --embeddings E.emb --out-dir D
//
// Every subcommand accepts --config FILE, a flat key=value file whose keys
// are the long option names; flags given on the command line win. The
// resolved configuration is written to <out-dir>/run_config.ini.

#ifndef LATENTDIAR_CLI_H_
#define LATENTDIAR_CLI_H_

#include <ostream>

namespace latentdiar {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitDivergence = 4;
inline constexpr int kExitInternal = 1;

// Reports go to `out`, JSON-lines logs and error messages to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace latentdiar

#endif  // LATENTDIAR_CLI_H_
