// DOM wiring: device picker -> baseline survey -> task -> post survey -> upload.

import { computeLetterbox, Letterbox, toCss, toLogical, viewportTooSmall } from "./letterbox.js";
import { parsePlan } from "./plan.js";
import { TaskRunner } from "./runner.js";
import { Cohort, Device, SCREEN_H, SCREEN_W } from "./schema.js";
import { BODY_PARTS, Survey } from "./survey.js";
import { fetchPlan, postSession } from "./upload.js";

const app = document.getElementById("app") as HTMLDivElement;

interface SetupChoice {
  device: Device;
  cohort: Cohort;
  participant: string;
}

function screenSetup(): Promise<SetupChoice> {
  return new Promise((resolve) => {
    app.innerHTML = `
      <div class="panel">
        <h1>Pointing + typing session</h1>
        <p>You will click circular targets and type a short word between
        consecutive clicks. Keep the window focused until the end.</p>
        <label>Participant ID <input id="pid" value="web${Math.floor(Math.random() * 1000)}"></label>
        <label>Device
          <select id="device">
            <option value="mouse">mouse</option>
            <option value="trackpad">trackpad</option>
          </select>
        </label>
        <label>Experience with this task
          <select id="cohort">
            <option value="novice">novice</option>
            <option value="expert">expert</option>
          </select>
        </label>
        <button id="start">Start</button>
      </div>`;
    (document.getElementById("start") as HTMLButtonElement).onclick = () => {
      resolve({
        device: (document.getElementById("device") as HTMLSelectElement).value as Device,
        cohort: (document.getElementById("cohort") as HTMLSelectElement).value as Cohort,
        participant: (document.getElementById("pid") as HTMLInputElement).value || "anon",
      });
    };
  });
}

function screenSurvey(phase: "baseline" | "post_device"): Promise<Survey> {
  return new Promise((resolve) => {
    const survey = new Survey(phase);
    const rows = BODY_PARTS.map(
      (part, i) => `
      <div class="slider-row">
        <span>${part}</span>
        <input type="range" min="0" max="10" step="1" value="0" data-part="${i}">
        <span class="value" id="val${i}">-</span>
      </div>`,
    ).join("");
    app.innerHTML = `
      <div class="panel">
        <h1>Discomfort survey (${phase === "baseline" ? "before the task" : "after the device"})</h1>
        <p>Rate your current discomfort from 0 (nothing at all) to 10
        (extremely strong). Move every slider once, even for a 0.</p>
        ${rows}
        <button id="submit" disabled>Continue</button>
      </div>`;
    const touched = new Set<number>();
    const submit = document.getElementById("submit") as HTMLButtonElement;
    app.querySelectorAll<HTMLInputElement>("input[type=range]").forEach((slider) => {
      slider.oninput = () => {
        const part = Number(slider.dataset.part);
        touched.add(part);
        survey.setRating(part, Number(slider.value));
        (document.getElementById(`val${part}`) as HTMLSpanElement).textContent = slider.value;
        submit.disabled = touched.size < BODY_PARTS.length;
      };
    });
    submit.onclick = () => {
      if (survey.complete) resolve(survey);
    };
  });
}

function screenMessage(html: string): void {
  app.innerHTML = `<div class="panel">${html}</div>`;
}

async function runTask(runner: TaskRunner): Promise<void> {
  app.innerHTML = `<canvas id="task"></canvas><div id="hud"></div>`;
  const canvas = document.getElementById("task") as HTMLCanvasElement;
  const hud = document.getElementById("hud") as HTMLDivElement;
  const ctx = canvas.getContext("2d")!;
  let box: Letterbox = computeLetterbox(window.innerWidth, window.innerHeight);

  function resize() {
    const dpr = window.devicePixelRatio || 1;
    canvas.style.width = `${window.innerWidth}px`;
    canvas.style.height = `${window.innerHeight}px`;
    canvas.width = Math.round(window.innerWidth * dpr);
    canvas.height = Math.round(window.innerHeight * dpr);
    ctx.setTransform(dpr, 0, 0, dpr, 0, 0);
    box = computeLetterbox(window.innerWidth, window.innerHeight);
  }
  resize();
  window.addEventListener("resize", resize);

  function draw() {
    ctx.clearRect(0, 0, window.innerWidth, window.innerHeight);
    if (viewportTooSmall(window.innerWidth, window.innerHeight)) {
      hud.textContent = "Window too small: enlarge it to continue.";
      requestAnimationFrame(draw);
      return;
    }
    // logical canvas frame
    const [x0, y0] = toCss(box, 0, 0);
    ctx.strokeStyle = "#475569";
    ctx.strokeRect(x0, y0, SCREEN_W * box.scale, SCREEN_H * box.scale);

    const view = runner.current();
    if (view.phase === "awaiting_click" && view.target) {
      const [cx, cy] = toCss(box, view.target.cx, view.target.cy);
      ctx.beginPath();
      ctx.arc(cx, cy, (view.target.w / 2) * box.scale, 0, Math.PI * 2);
      ctx.fillStyle = "#f59e0b";
      ctx.fill();
      hud.textContent = `set ${view.setIndex + 1}/${view.setCount} - click the target`;
    } else if (view.phase === "typing_word" && view.word) {
      ctx.fillStyle = "#e2e8f0";
      ctx.font = `${Math.round(42 * box.scale)}px monospace`;
      ctx.textAlign = "center";
      const [wx, wy] = toCss(box, SCREEN_W / 2, SCREEN_H / 2);
      ctx.fillText(view.word, wx, wy - 30 * box.scale);
      ctx.fillStyle = "#38bdf8";
      ctx.fillText(view.typed || "_", wx, wy + 40 * box.scale);
      hud.textContent = "type the word (backspace allowed)";
    }
    if (!runner.done) requestAnimationFrame(draw);
  }

  canvas.addEventListener("pointermove", (e) => {
    const [lx, ly] = toLogical(box, e.clientX, e.clientY);
    runner.pointerMove(lx, ly);
  });
  canvas.addEventListener("pointerdown", (e) => {
    const [lx, ly] = toLogical(box, e.clientX, e.clientY);
    runner.pointerClick(lx, ly);
  });
  window.addEventListener("keydown", (e) => {
    if (e.key.length === 1 || e.key === "Backspace") {
      runner.keyInput(e.key);
      e.preventDefault();
    }
  });
  document.addEventListener("visibilitychange", () => {
    if (document.hidden && !runner.done) runner.invalidate("visibility_lost");
  });

  requestAnimationFrame(draw);
  await new Promise<void>((resolve) => {
    runner.onDone = () => resolve();
  });
}

async function mainFlow() {
  const setup = await screenSetup();
  const clock0 = performance.now();
  const clock = () => (performance.now() - clock0) / 1000;

  const baseline = await screenSurvey("baseline");

  screenMessage("<h1>Loading plan…</h1>");
  let planText: string;
  try {
    planText = await fetchPlan("", setup.device, Math.floor(Math.random() * 1e6), 8);
  } catch (err) {
    screenMessage(`<h1>Cannot reach the server</h1><p>${String(err)}</p>`);
    return;
  }
  const plan = parsePlan(planText);
  const runner = new TaskRunner(plan, clock, setup.participant, setup.cohort);

  await runTask(runner);

  const post = await screenSurvey("post_device");

  if (runner.invalidReason) {
    screenMessage(`<h1>Session invalid</h1>
      <p>Reason: ${runner.invalidReason}. The log was not uploaded; please run again without leaving the window.</p>`);
    return;
  }
  const violations = runner.validate();
  if (violations.length > 0) {
    screenMessage(`<h1>Capture problem</h1><p>${violations.length} violations; first:
      ${violations[0].rule}. Nothing was uploaded.</p>`);
    return;
  }
  screenMessage("<h1>Uploading…</h1>");
  const body = runner.serialize([baseline.toRecord(), post.toRecord()]);
  const result = await postSession("", body);
  if (result.ok) {
    screenMessage(`<h1>Done</h1><p>Session stored (${runner.events.length} events,
      ${runner.stats.misses} misses). Thank you!</p>`);
  } else {
    screenMessage(`<h1>Upload failed</h1><p>HTTP ${result.status}: ${result.detail}</p>`);
  }
}

mainFlow();
