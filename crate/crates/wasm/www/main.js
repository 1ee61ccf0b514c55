import init, { Demo } from "../pkg/grasp_wasm.js";

const $ = (id) => document.getElementById(id);
const canvas = $("view");
const ctx = canvas.getContext("2d");

let demo = null;
let view = null;
let kept = null;
let cut = null;
let shortest = null;

function status(msg) {
  $("status").textContent = msg || "";
}

function edgeSet(nodes) {
  const s = new Set();
  for (let i = 0; i + 1 < nodes.length; i++) {
    const [a, b] = [nodes[i], nodes[i + 1]].sort((x, y) => x - y);
    s.add(a + "," + b);
  }
  return s;
}

function draw() {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!view) return;
  const W = canvas.width;
  const H = canvas.height;
  const at = (v) => [view.positions[v][0] * W, view.positions[v][1] * H];
  const star = new Set(view.p_star_edges);
  const cutSet = new Set(cut || []);
  const sp = edgeSet(shortest || view.shortest);

  view.edges.forEach(([u, v], i) => {
    const [x1, y1] = at(u);
    const [x2, y2] = at(v);
    ctx.beginPath();
    ctx.moveTo(x1, y1);
    ctx.lineTo(x2, y2);
    if (cutSet.has(i)) {
      ctx.strokeStyle = "#d62728";
      ctx.lineWidth = 2.5;
      ctx.setLineDash([5, 3]);
    } else if (star.has(i)) {
      ctx.strokeStyle = "#2b6cb0";
      ctx.lineWidth = 4;
      ctx.setLineDash([]);
    } else if (sp.has(u + "," + v)) {
      ctx.strokeStyle = "#e0a000";
      ctx.lineWidth = 3;
      ctx.setLineDash([]);
    } else {
      ctx.strokeStyle = "rgba(0,0,0,0.15)";
      ctx.lineWidth = 1;
      ctx.setLineDash([]);
    }
    ctx.stroke();
  });
  ctx.setLineDash([]);

  const keptSet = new Set(kept || []);
  for (let v = 0; v < view.n; v++) {
    const [x, y] = at(v);
    const end = v === view.source || v === view.target;
    ctx.beginPath();
    ctx.arc(x, y, end ? 7 : 3.5, 0, 2 * Math.PI);
    ctx.fillStyle = end ? "#2b6cb0" : keptSet.has(v) ? "#4caf50" : "#999";
    ctx.fill();
  }
  ctx.fillStyle = "#000";
  ctx.font = "12px system-ui";
  ctx.fillText("s", ...at(view.source).map((c) => c + 9));
  ctx.fillText("t", ...at(view.target).map((c) => c + 9));
}

function generate() {
  try {
    demo = new Demo($("family").value, +$("n").value, +$("kstar").value, +$("seed").value);
  } catch (e) {
    status(String(e));
    return;
  }
  view = JSON.parse(demo.view());
  cut = null;
  shortest = null;
  $("trace").innerHTML = "";
  $("summary").textContent =
    `${view.n} nodes, ${view.m} edges; p* has ${view.p_star.length - 1} edges, ` +
    `shortest path has ${view.shortest.length - 1}`;
  status("");
  rescore();
}

function rescore() {
  if (!demo) return;
  $("pctval").textContent = $("pct").value;
  try {
    const s = JSON.parse(demo.scores($("scorer").value, +$("pct").value));
    kept = s.kept;
    status(`${s.kept.length} nodes / ${s.kept_edges} edges kept at percentile ${s.percentile}`);
  } catch (e) {
    status(String(e));
  }
  draw();
}

function attack() {
  if (!demo) return;
  let r;
  try {
    r = JSON.parse(
      demo.attack($("method").value, $("cover").value, $("scorer").value, +$("pct").value, Math.min(10, +$("pct").value))
    );
  } catch (e) {
    status(String(e));
    return;
  }
  cut = r.cut_edges;
  shortest = r.shortest_after;
  $("summary").innerHTML =
    `<b>${r.method}</b>: cut ${r.cut_edges.length} edges (cost ${r.total_cost}), ` +
    `${r.valid ? "p* is now shortest" : "<span style='color:#a00'>attack failed</span>"}<br>` +
    `${r.wall_time_ms.toFixed(2)} ms, ${r.constraints} constraint paths, ` +
    `subproblem ${r.subproblem_edges} of ${view.m} edges (${r.reduction_pct.toFixed(1)}% smaller)`;
  const rows = r.trace.map(
    (t) =>
      `<tr><td>${t.threshold}</td><td>${t.subgraph_nodes}</td><td>${t.subgraph_edges}</td>` +
      `<td>${t.step_cut.length}</td><td>${t.cumulative_deleted}</td><td>${t.valid ? "yes" : t.infeasible ? "infeasible" : "no"}</td></tr>`
  );
  $("trace").innerHTML = rows.length
    ? "<tr><th>pct</th><th>nodes</th><th>edges</th><th>cut</th><th>total</th><th>valid</th></tr>" + rows.join("")
    : "";
  draw();
}

await init();
$("gen").onclick = generate;
$("attack").onclick = attack;
$("pct").oninput = rescore;
$("scorer").onchange = rescore;
generate();
