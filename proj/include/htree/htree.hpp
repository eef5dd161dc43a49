#pragma once
#include <htree/bench.hpp>
#include <htree/core.hpp>
#include <htree/inference.hpp>
#include <htree/ingestion.hpp>
#include <htree/io.hpp>
#include <htree/transforms.hpp>
#include <htree/tree.hpp>
