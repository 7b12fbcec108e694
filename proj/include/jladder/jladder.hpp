#pragma once

#include "jladder/balance.hpp"
#include "jladder/errors.hpp"
#include "jladder/sieve.hpp"
#include "jladder/stats.hpp"
#include "jladder/store.hpp"
#include "jladder/verify.hpp"
#include "jladder/walker.hpp"
