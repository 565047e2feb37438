// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#![no_main]

use asnkit::graph::{load_graph, load_graph_with, write_graph, LoadOptions};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(loaded) = load_graph(data) {
        // Written graphs reload to the same edge set.
        let text = write_graph(&loaded.graph);
        let again = load_graph(text.as_bytes()).expect("written graph reloads");
        assert_eq!(again.graph.edges(), loaded.graph.edges());
    }
    let _ = load_graph_with(data, LoadOptions { symmetrize: true });
});
