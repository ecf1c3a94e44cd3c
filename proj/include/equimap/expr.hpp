#pragma once

#include "equimap/expr/derivative.hpp"
#include "equimap/expr/evaluate.hpp"
#include "equimap/expr/expression.hpp"
#include "equimap/expr/parser.hpp"
#include "equimap/expr/simplify.hpp"
