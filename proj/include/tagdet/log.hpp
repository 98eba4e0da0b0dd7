// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <string_view>

namespace tagdet::log {

enum class Level { Quiet = 0, Error, Warn, Info, Debug };

/// Initial level comes from TAGDET_LOG (quiet|error|warn|info|debug); default warn.
Level level();
void set_level(Level lvl);

void error(std::string_view msg);
void warn(std::string_view msg);
void info(std::string_view msg);
void debug(std::string_view msg);

}  // namespace tagdet::log
