// Staged questionnaire: Q1..Q4 with bug flags before the reveal, Q5
// with a final bug-flag edit afterwards.  Stage transitions only ever
// move forward and mirror the server's state.
import { BUG_FLAGS } from './types.js';
export const LIKERT_LABELS = {
    1: 'strong disagreement',
    2: 'somewhat disagreement',
    3: 'neutral / unsure',
    4: 'somewhat agreement',
    5: 'strong agreement',
};
export const STAGE1_QUESTIONS = [
    ['q1', 'From a drivers perspective: Would you wish for an intervention?'],
    ['q2', 'Do you perceive the traffic situation as critical?'],
    ['q3', 'Would you assume that, without a longitudinal intervention, a collision would have occurred?'],
    ['q4', 'Would you label the event as a true positive (not a false positive)?'],
];
export const STAGE2_QUESTION = 'Do you agree with the TCPr/FCPr classification?';
export function newState() {
    return { stage: 'stage1', answers: {}, bugFlags: new Set() };
}
export function setAnswer(state, q, value) {
    if (value < 1 || value > 5 || !Number.isInteger(value)) {
        throw new Error(`invalid Likert value ${value}`);
    }
    if (q === 'q5' && state.stage !== 'revealed') {
        throw new Error('q5 is only available after the reveal');
    }
    state.answers[q] = value;
}
export function toggleFlag(state, flag) {
    if (!BUG_FLAGS.includes(flag)) {
        throw new Error(`unknown bug flag ${flag}`);
    }
    if (state.bugFlags.has(flag))
        state.bugFlags.delete(flag);
    else
        state.bugFlags.add(flag);
}
/** Names of unanswered stage-1 questions; empty means submittable. */
export function stage1Missing(state) {
    return STAGE1_QUESTIONS.map(([q]) => q).filter((q) => state.answers[q] === undefined);
}
export function stage1Body(state) {
    const missing = stage1Missing(state);
    if (missing.length) {
        throw new Error(`unanswered: ${missing.join(', ')}`);
    }
    return {
        q1: state.answers.q1,
        q2: state.answers.q2,
        q3: state.answers.q3,
        q4: state.answers.q4,
        bug_flags: [...state.bugFlags].sort(),
    };
}
export function stage2Body(state) {
    if (state.stage !== 'revealed') {
        throw new Error('stage 2 requires the reveal');
    }
    if (state.answers.q5 === undefined) {
        throw new Error('unanswered: q5');
    }
    return { q5: state.answers.q5, bug_flags: [...state.bugFlags].sort() };
}
export function advance(state, to) {
    const order = ['stage1', 'revealed', 'stage2_done'];
    if (order.indexOf(to) < order.indexOf(state.stage)) {
        throw new Error(`stage cannot move backwards (${state.stage} -> ${to})`);
    }
    state.stage = to;
}
