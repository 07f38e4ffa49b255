// Renders the first item of a freshly generated manifest (or the item named on
// the command line) to <id>.png plus its sidecar.
#include <iostream>

#include "fc2t/benchmark.hpp"
#include "fc2t/render.hpp"

int main(int argc, char** argv) {
  using namespace fc2t;
  const Manifest m = generate_manifest(GenConfig{});
  const BenchmarkItem* item = argc > 1 ? m.find_item(argv[1]) : &m.items.front();
  if (!item) {
    std::cerr << "no such item\n";
    return 1;
  }
  const Rendered r = render(*item, m.table_for(*item), StyleSpec{});
  write_text_file(item->id + ".png", std::string(r.png.begin(), r.png.end()));
  write_text_file(item->id + ".png.meta.json", r.meta.dump(1));
  std::cout << item->id << ".png " << r.meta["y_axis"]["ticks"].size() << " ticks\n";
}
