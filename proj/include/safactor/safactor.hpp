#pragma once

#include "safactor/annealer.hpp"
#include "safactor/biguint.hpp"
#include "safactor/energy.hpp"
#include "safactor/moves.hpp"
#include "safactor/number_theory.hpp"
#include "safactor/search.hpp"
