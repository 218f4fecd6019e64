// Node allocation and reclamation workload: builds and prunes binary search
// trees to stress the allocator and garbage collector.
'use strict';

function insert(root, key) {
  if (root === null) return { key: key, left: null, right: null, payload: 'p' + key };
  if (key < root.key) root.left = insert(root.left, key);
  else root.right = insert(root.right, key);
  return root;
}

function countLeaves(node) {
  if (node === null) return 0;
  if (node.left === null && node.right === null) return 1;
  return countLeaves(node.left) + countLeaves(node.right);
}

function run() {
  let leaves = 0;
  let state = 12345;
  for (let round = 0; round < 90; round++) {
    let root = null;
    for (let i = 0; i < 9000; i++) {
      state = (state * 1103515245 + 12345) & 0x7fffffff;
      root = insert(root, state % 100000);
    }
    leaves += countLeaves(root);
    root = null;  // drop the whole tree for the collector
  }
  return leaves;
}

run();  // warm-up pass
const t0 = process.hrtime.bigint();
const leaves = run();
const seconds = Number(process.hrtime.bigint() - t0) / 1e9;
console.log('leaves ' + leaves);
console.log('RESULT: ' + seconds.toFixed(6));
