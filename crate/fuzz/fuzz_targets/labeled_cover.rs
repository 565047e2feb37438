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

use asnkit::graph::{load_labeled_cover, write_labeled_cover, IdMap};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let ids = IdMap::new(["a", "b", "c", "d", "e", "f"].map(String::from).to_vec()).unwrap();
    if let Ok(cover) = load_labeled_cover(data, &ids) {
        let again = load_labeled_cover(write_labeled_cover(&cover, &ids).as_bytes(), &ids).expect("reloads");
        assert!(again.same_as(&cover));
    }
});
