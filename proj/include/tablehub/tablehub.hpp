#pragma once

#include "tablehub/error.hpp"
#include "tablehub/value.hpp"
#include "tablehub/table.hpp"
#include "tablehub/json_text.hpp"
#include "tablehub/ingest.hpp"
#include "tablehub/expr.hpp"
#include "tablehub/aggregate.hpp"
#include "tablehub/transform.hpp"
#include "tablehub/pivot.hpp"
#include "tablehub/exchange.hpp"
#include "tablehub/session.hpp"
#include "tablehub/bridge.hpp"
