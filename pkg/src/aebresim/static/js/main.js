// Page wiring: event list, replay canvas with playback controls, the
// staged questionnaire and the post-reveal overlay.  All staging rules
// live on the server; this client only mirrors them.
import { ApiClient, ApiError } from './api.js';
import { participantStateSeries, drawStripChart } from './charts.js';
import { ReplayScene, overlaysFromReveal } from './replay.js';
import { LIKERT_LABELS, STAGE1_QUESTIONS, STAGE2_QUESTION, advance, newState, setAnswer, stage1Body, stage2Body, stage1Missing, toggleFlag, } from './questionnaire.js';
import { BUG_FLAGS } from './types.js';
const api = new ApiClient('');
let scene = null;
let qstate = newState();
let currentEvent = null;
function el(id) {
    const node = document.getElementById(id);
    if (!node)
        throw new Error(`missing element #${id}`);
    return node;
}
function ui() {
    return {
        eventList: el('event-list'),
        canvas: el('replay-canvas'),
        chart: el('state-chart'),
        scrub: el('scrub'),
        playBtn: el('play'),
        speedSel: el('speed'),
        clock: el('clock'),
        raterInput: el('rater-id'),
        questionnaire: el('questionnaire'),
        banner: el('banner'),
        verdict: el('verdict'),
    };
}
function showBanner(text, kind = 'error') {
    const banner = ui().banner;
    banner.textContent = text;
    banner.className = `banner ${kind}`;
    banner.style.display = text ? 'block' : 'none';
}
function raterId() {
    const value = ui().raterInput.value.trim();
    if (!value)
        throw new Error('enter a rater id first');
    return value;
}
// --- event list -----------------------------------------------------------
async function loadEvents() {
    const events = await api.listEvents();
    const list = ui().eventList;
    list.innerHTML = '';
    events.forEach((event, i) => {
        const item = document.createElement('button');
        item.className = 'event-item';
        item.textContent =
            `#${i + 1} ${event.level} @${event.frame} (${event.recording_id})` +
                (event.track_ended ? ' [truncated]' : '');
        item.addEventListener('click', () => selectEvent(event).catch(reportError));
        list.appendChild(item);
    });
}
async function selectEvent(event) {
    showBanner('');
    currentEvent = event;
    qstate = newState();
    ui().verdict.textContent = '';
    const payload = await api.getReplay(event.event_id);
    scene = new ReplayScene(payload);
    scene.time = scene.activationOffset;
    scene.playing = true;
    const state = await api.getState(event.event_id, ui().raterInput.value.trim() || '-');
    if (state.stage1)
        advance(qstate, 'revealed');
    if (state.stage2)
        advance(qstate, 'stage2_done');
    renderQuestionnaire();
}
// --- playback -------------------------------------------------------------
function animate(nowMs) {
    const { canvas, scrub, clock, chart } = ui();
    if (scene) {
        scene.tick(nowMs);
        const ctx = canvas.getContext('2d');
        if (ctx)
            scene.draw(ctx, canvas.width, canvas.height);
        scrub.max = String(scene.duration);
        scrub.step = '0.04';
        scrub.value = String(scene.time);
        const rel = scene.time - scene.activationOffset;
        clock.textContent = `t0${rel >= 0 ? '+' : ''}${rel.toFixed(2)} s`;
        const chartCtx = chart.getContext('2d');
        if (chartCtx) {
            const series = [
                participantStateSeries(scene.payload, scene.payload.ego_id),
                participantStateSeries(scene.payload, scene.payload.object_id),
            ];
            const first = scene.payload.frames[0]?.frame ?? 0;
            drawStripChart(chartCtx, chart.width, chart.height, series, ['#111111', '#d07000'], first / scene.payload.fps + scene.time);
        }
    }
    requestAnimationFrame(animate);
}
// --- questionnaire rendering ------------------------------------------------
function likertRow(name, label, enabled) {
    const row = document.createElement('div');
    row.className = 'question';
    const caption = document.createElement('p');
    caption.textContent = label;
    row.appendChild(caption);
    const options = document.createElement('div');
    options.className = 'likert';
    for (let v = 1; v <= 5; v++) {
        const lab = document.createElement('label');
        const input = document.createElement('input');
        input.type = 'radio';
        input.name = name;
        input.value = String(v);
        input.disabled = !enabled;
        input.checked = qstate.answers[name] === v;
        input.addEventListener('change', () => setAnswer(qstate, name, v));
        lab.appendChild(input);
        lab.append(` ${v} (${LIKERT_LABELS[v]})`);
        options.appendChild(lab);
    }
    row.appendChild(options);
    return row;
}
function flagRow(enabled) {
    const row = document.createElement('div');
    row.className = 'question';
    const caption = document.createElement('p');
    caption.textContent = 'Did you notice a potential bug in the data?';
    row.appendChild(caption);
    for (const flag of BUG_FLAGS) {
        const lab = document.createElement('label');
        const input = document.createElement('input');
        input.type = 'checkbox';
        input.checked = qstate.bugFlags.has(flag);
        input.disabled = !enabled;
        input.addEventListener('change', () => toggleFlag(qstate, flag));
        lab.appendChild(input);
        lab.append(` ${flag.replace('_', ' ')}`);
        row.appendChild(lab);
    }
    return row;
}
function renderQuestionnaire() {
    const box = ui().questionnaire;
    box.innerHTML = '';
    if (!currentEvent)
        return;
    if (qstate.stage === 'stage1') {
        for (const [name, label] of STAGE1_QUESTIONS) {
            box.appendChild(likertRow(name, label, true));
        }
        box.appendChild(flagRow(true));
        const submit = document.createElement('button');
        submit.textContent = 'Submit Q1-Q4 and reveal';
        submit.addEventListener('click', () => submitStage1().catch(reportError));
        box.appendChild(submit);
    }
    else if (qstate.stage === 'revealed') {
        box.appendChild(likertRow('q5', STAGE2_QUESTION, true));
        box.appendChild(flagRow(true));
        const submit = document.createElement('button');
        submit.textContent = 'Submit Q5';
        submit.addEventListener('click', () => submitStage2().catch(reportError));
        box.appendChild(submit);
        if (!scene?.overlays) {
            const show = document.createElement('button');
            show.textContent = 'Load reveal overlay';
            show.addEventListener('click', () => loadReveal().catch(reportError));
            box.appendChild(show);
        }
    }
    else {
        const done = document.createElement('p');
        done.textContent = 'Annotation complete for this event.';
        box.appendChild(done);
    }
}
async function submitStage1() {
    if (!currentEvent)
        return;
    const missing = stage1Missing(qstate);
    if (missing.length) {
        showBanner(`answer all stage-1 questions first (missing: ${missing.join(', ')})`);
        return;
    }
    await api.submitStage1(currentEvent.event_id, raterId(), stage1Body(qstate));
    advance(qstate, 'revealed');
    await loadReveal();
    renderQuestionnaire();
}
async function loadReveal() {
    if (!currentEvent || !scene)
        return;
    const reveal = await api.getReveal(currentEvent.event_id, raterId());
    scene.overlays = overlaysFromReveal(reveal);
    const cls = reveal.classification;
    ui().verdict.innerHTML =
        `<span class="badge ${cls.verdict.toLowerCase()}">${cls.verdict}</span> ` +
            `${cls.reason}${cls.needs_review ? ' (needs review)' : ''} — ` +
            `predicted ttc ${reveal.prediction.ttc.toFixed(2)} s`;
}
async function submitStage2() {
    if (!currentEvent)
        return;
    await api.submitStage2(currentEvent.event_id, raterId(), stage2Body(qstate));
    advance(qstate, 'stage2_done');
    showBanner('stage 2 stored, thank you', 'info');
    renderQuestionnaire();
}
function reportError(err) {
    if (err instanceof ApiError) {
        showBanner(`server said ${err.status}: ${err.message}`);
    }
    else {
        showBanner(String(err));
    }
}
export function boot() {
    const { playBtn, speedSel, scrub, raterInput } = ui();
    raterInput.value = localStorage.getItem('rater_id') ?? '';
    raterInput.addEventListener('change', () => {
        localStorage.setItem('rater_id', raterInput.value.trim());
    });
    playBtn.addEventListener('click', () => {
        if (scene)
            scene.playing = !scene.playing;
    });
    speedSel.addEventListener('change', () => {
        if (scene)
            scene.speed = parseFloat(speedSel.value);
    });
    scrub.addEventListener('input', () => {
        if (scene) {
            scene.playing = false;
            scene.time = parseFloat(scrub.value);
        }
    });
    loadEvents().catch(reportError);
    requestAnimationFrame(animate);
}
boot();
