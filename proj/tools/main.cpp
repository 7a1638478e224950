#include "mtsb/cli.hpp"

int main(int argc, char** argv) { return mtsb::cli_dispatch(argc, argv); }
