#pragma once

#include "bench.hpp"
#include "char_set.hpp"
#include "corpus.hpp"
#include "kernels.hpp"
#include "match_stream.hpp"
#include "simd.hpp"
