// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "doctest.h"
#include "gen.hpp"
#include "xcom/time_core.hpp"
#include "xcom/wire.hpp"

namespace doctest {

template <>
struct StringMaker<xcom::WallTime> {
  static String convert(const xcom::WallTime& t) { return (xcom::to_string(t) + " fs").c_str(); }
};

template <>
struct StringMaker<xcom::Frame> {
  static String convert(const xcom::Frame& f) { return xcom::to_string(f).c_str(); }
};

}  // namespace doctest

namespace xcom::testing {

inline WallTime fs(__int128 v) { return WallTime(v); }

}  // namespace xcom::testing
