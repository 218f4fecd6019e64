// String manipulation workload: repeated building, slicing and hashing.
// Self-times the core loop and reports it on the RESULT line.
'use strict';

function hash(s) {
  let h = 5381;
  for (let i = 0; i < s.length; i++) h = ((h * 33) ^ s.charCodeAt(i)) >>> 0;
  return h;
}

function run() {
  let acc = 0;
  for (let round = 0; round < 300; round++) {
    const parts = [];
    for (let i = 0; i < 4000; i++) {
      parts.push('seg' + (((i + round) * 2654435761) >>> 16).toString(36));
    }
    const joined = parts.join('-');
    acc = (acc + hash(joined) + hash(joined.slice(round, round + 10000))) >>> 0;
  }
  return acc;
}

run();  // warm-up pass
const t0 = process.hrtime.bigint();
const checksum = run();
const seconds = Number(process.hrtime.bigint() - t0) / 1e9;
console.log('checksum ' + checksum);
console.log('RESULT: ' + seconds.toFixed(6));
