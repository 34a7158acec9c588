#pragma once

// Convenience include for the whole library.

#include "util.hpp"
#include "url.hpp"
#include "origin.hpp"
#include "hash.hpp"
#include "recipe.hpp"
#include "crypto.hpp"
#include "config.hpp"
#include "scan.hpp"
#include "fetch.hpp"
#include "html.hpp"
#include "webcheck.hpp"
#include "store.hpp"
#include "engine.hpp"
#include "report.hpp"
