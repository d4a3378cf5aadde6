#include "sbp_coefficients.hpp"

namespace shapeopt::coeffs {

// Generated by tools/derive_d2_order6.py.
const double kD2Order6Boundary[6][9][9] = {
    {
        {0.8058198875328583, -1.0694558036421768, 0.137193542625081, 0.19642090696970743, -0.05457641038343218, -0.01806818836216353, 0.005165843879482046, -0.0034557465053943145, 0.0009559678860383939},
        {-1.0694558036421768, 1.5018926020726868, -0.34814064157875746, -0.1620135907592894, 0.06179309954788061, 0.025883719765133633, -0.01959119471908003, 0.01320953946681194, -0.0035777301532091744},
        {0.137193542625081, -0.34814064157875746, 0.3726956754503433, -0.200210427249379, 0.03816986549090916, -0.012961022588356805, 0.0268547085224776, -0.018419922539687134, 0.004818221867369464},
        {0.19642090696970743, -0.1620135907592894, -0.200210427249379, 0.24682707181582653, -0.08612427184305561, 0.011825237783905504, -0.014756403664345781, 0.0106009956241535, -0.0025695186775226814},
        {-0.05457641038343218, 0.06179309954788061, 0.03816986549090916, -0.08612427184305561, 0.0497363703690597, -0.009414260112161047, 0.0018628669915032833, -0.0017187929443959504, 0.00027153288369284763},
        {-0.01806818836216353, 0.025883719765133633, -0.012961022588356805, 0.011825237783905504, -0.009414260112161047, 0.002928996438255536, -0.0005770438553121751, 0.0004515892934810208, -6.902836278111254e-05},
        {0.005165843879482046, -0.01959119471908003, 0.0268547085224776, -0.014756403664345781, 0.0018628669915032833, -0.0005770438553121751, 0.0020687988983953296, -0.0013925550122964112, 0.0003649789591770606},
        {-0.0034557465053943145, 0.01320953946681194, -0.018419922539687134, 0.0106009956241535, -0.0017187929443959504, 0.0004515892934810208, -0.0013925550122964112, 0.0009992668145620493, -0.0002743741972344267},
        {0.0009559678860383939, -0.0035777301532091744, 0.004818221867369464, -0.0025695186775226814, 0.00027153288369284763, -6.902836278111254e-05, 0.0003649789591770606, -0.0002743741972344267, 7.99497944684496e-05},
    },
    {
        {0.30290950246975423, -0.017407519019649986, -0.17437697343626474, -0.1536503267342649, 0.028619692649639712, 0.01308602799700237, 0.0012589767404654973, -0.0007054100200434595, 0.0002660293533612677},
        {-0.017407519019649986, 0.05012231083318184, -0.029530558217662307, -0.035950701879599166, 0.04517141147415268, -0.010027276808336401, -0.0036392413055992704, 0.0020155021684936723, -0.0007539272449810712},
        {-0.17437697343626474, -0.029530558217662307, 0.1322707808908296, 0.12447056975060723, -0.05419245649726633, -6.044300898782281e-05, 0.0021612327017163885, -0.0011736730449947144, 0.0004315208620226541},
        {-0.1536503267342649, -0.035950701879599166, 0.12447056975060723, 0.11884333347454454, -0.05724550655994661, 0.0018155999633533001, 0.002618827640717278, -0.0014372060621986723, 0.0005354104067870779},
        {0.028619692649639712, 0.04517141147415268, -0.05419245649726633, -0.05724550655994661, 0.04745971901869995, -0.0076448359683326415, -0.003310597950652378, 0.0018066518979111695, -0.0006640780642052483},
        {0.01308602799700237, -0.010027276808336401, -6.044300898782281e-05, 0.0018155999633533001, -0.0076448359683326415, 0.00238981834431792, 0.0007002095909659938, -0.0004207008445744806, 0.00016160073459218184},
        {0.0012589767404654973, -0.0036392413055992704, 0.0021612327017163885, 0.002618827640717278, -0.003310597950652378, 0.0007002095909659938, 0.0003289106826365935, -0.00017471753397520418, 5.639943372550901e-05},
        {-0.0007054100200434595, 0.0020155021684936723, -0.0011736730449947144, -0.0014372060621986723, 0.0018066518979111695, -0.0004207008445744806, -0.00017471753397520418, 0.0001477635718850039, -5.821013250320753e-05},
        {0.0002660293533612677, -0.0007539272449810712, 0.0004315208620226541, 0.0005354104067870779, -0.0006640780642052483, 0.00016160073459218184, 5.639943372550901e-05, -5.821013250320753e-05, 2.5254651200167143e-05},
    },
    {
        {0.008429024582993834, -0.043570576688962276, 0.008864993898136714, 0.037968323881777996, -0.014607544035463417, 0.0022081204911137374, 0.0010880744980934505, -0.000611732074944111, 0.00023131544725407043},
        {-0.043570576688962276, 0.2977684716775291, -0.025555187771558664, -0.2735195845202427, 0.04842078925468131, -0.0014886464456788586, -0.0031470126990926894, 0.0017456922893874145, -0.0006539450960626307},
        {0.008864993898136714, -0.025555187771558664, 0.015109359544449547, 0.01829031439306472, -0.023053268998512778, 0.005114654883311417, 0.001871226298655809, -0.0010147072693993007, 0.000372615021852419},
        {0.037968323881777996, -0.2735195845202427, 0.01829031439306472, 0.2533846857610632, -0.0369792916450985, -0.000629803324104906, 0.0022651196847299454, -0.0012433270087788394, 0.0004635627775888774},
        {-0.014607544035463417, 0.04842078925468131, -0.023053268998512778, -0.0369792916450985, 0.03568773071425422, -0.007591604122755847, -0.0028659895743178725, 0.0015629451536822662, -0.0005737667464697811},
        {0.0022081204911137374, -0.0014886464456788586, 0.005114654883311417, -0.000629803324104906, -0.007591604122755847, 0.0020108174479914706, 0.0006015080518692488, -0.0003665990706732103, 0.0001415520889265503},
        {0.0010880744980934505, -0.0031470126990926894, 0.001871226298655809, 0.0022651196847299454, -0.0028659895743178725, 0.0006015080518692488, 0.0002930026974926258, -0.00015503456000574435, 4.910560257497216e-05},
        {-0.000611732074944111, 0.0017456922893874145, -0.0010147072693993007, -0.0012433270087788394, 0.0015629451536822662, -0.0003665990706732103, -0.00015503456000574435, 0.00013697495143199137, -5.42124107004638e-05},
        {0.00023131544725407043, -0.0006539450960626307, 0.000372615021852419, 0.0004635627775888774, -0.0005737667464697811, 0.0001415520889265503, 4.910560257497216e-05, -5.42124107004638e-05, 2.3773315036298454e-05},
    },
    {
        {0.022669842744886957, -0.059541970610908546, -0.03286978218124821, 0.013156918506791888, 0.05749379290750967, -0.0036828227583552663, 0.003236258101050182, -0.0007417969867251995, 0.00027956027699853613},
        {-0.059541970610908546, 0.15696729196346199, 0.07929199933234711, -0.03787362864566955, -0.1395355549167745, 0.008026031535817565, -0.00866144047810956, 0.0021200926786019312, -0.0007928208587663643},
        {-0.03286978218124821, 0.07929199933234711, 0.13520553681580158, 0.022267846151187928, -0.22617583320024046, 0.0259032824812095, -0.0028426236243417682, -0.001234607305379986, 0.00045418153066412935},
        {0.013156918506791888, -0.03787362864566955, 0.022267846151187928, 0.027268226215914522, -0.034207102309695966, 0.007578790273975413, 0.002758771978172366, -0.0015136610608378722, 0.00056383889016072},
        {0.05749379290750967, -0.1395355549167745, -0.22617583320024046, -0.034207102309695966, 0.3789661163201964, -0.04293181908459508, 0.005187931750733495, 0.0019020024844772644, -0.0006995339516116901},
        {-0.0036828227583552663, 0.008026031535817565, 0.0259032824812095, 0.007578790273975413, -0.04293181908459508, 0.00550149921019854, -0.00012256677828376193, -0.00044186571647340713, 0.00016947083650555223},
        {0.003236258101050182, -0.00866144047810956, -0.0028426236243417682, 0.002758771978172366, 0.005187931750733495, -0.00012256677828376193, 0.0005667676247655115, -0.00018232819072675133, 5.922961673960043e-05},
        {-0.0007417969867251995, 0.0021200926786019312, -0.001234607305379986, -0.0015136610608378722, 0.0019020024844772644, -0.00044186571647340713, -0.00018232819072675133, 0.00015191987301819084, -5.9755775954200084e-05},
        {0.00027956027699853613, -0.0007928208587663643, 0.00045418153066412935, 0.00056383889016072, -0.0006995339516116901, 0.00016947083650555223, 5.922961673960043e-05, -5.9755775954200084e-05, 2.5829435264783217e-05},
    },
    {
        {0.005831962013671426, -0.016817986517774178, 0.0073214288528248295, 0.03291654597497035, -0.012021528584090538, -0.022675789043738532, 0.00638481271728054, -0.0011451271199820643, 0.00020568170683816237},
        {-0.016817986517774178, 0.04852155858597708, -0.021091994098251018, -0.09546380326209625, 0.0346409948466948, 0.06605174278855322, -0.018559769806361846, 0.0032993209013634822, -0.0005800634381052039},
        {0.0073214288528248295, -0.021091994098251018, 0.013617359886071947, 0.005816714345192722, -0.020428022172234373, 0.015820759165566505, -0.0007564367391438284, -0.0006286952830028297, 0.0003288860429759304},
        {0.03291654597497035, -0.09546380326209625, 0.005816714345192722, 0.4769618051481989, -0.02491252542973775, -0.4910462595498089, 0.10821936840293923, -0.012902735320423795, 0.000410889690765131},
        {-0.012021528584090538, 0.0346409948466948, -0.020428022172234373, -0.02491252542973775, 0.031356583703664814, -0.006969855997829235, -0.0025424387736634486, 0.0013841356541086697, -0.0005073432469135486},
        {-0.022675789043738532, 0.06605174278855322, 0.015820759165566505, -0.4910462595498089, -0.006969855997829235, 0.5410519845659864, -0.11485276309683444, 0.012493381196850601, 0.00012679997125367788},
        {0.00638481271728054, -0.018559769806361846, -0.0007564367391438284, 0.10821936840293923, -0.0025424387736634486, -0.11485276309683444, 0.024946198840011195, -0.0028826879684095076, 4.3716424181648004e-05},
        {-0.0011451271199820643, 0.0032993209013634822, -0.0006286952830028297, -0.012902735320423795, 0.0013841356541086697, 0.012493381196850601, -0.0028826879684095076, 0.0004336420136115531, -5.123407411609303e-05},
        {0.00020568170683816237, -0.0005800634381052039, 0.0003288860429759304, 0.000410889690765131, -0.0005073432469135486, 0.00012679997125367788, 4.3716424181648004e-05, -5.123407411609303e-05, 2.266692312104853e-05},
    },
    {
        {0.006494952576559908, -0.01854938074897275, 0.01064436905603481, 0.01241587592778768, -0.008496438244342118, 0.0036658631276739566, -0.007235019693087945, 0.0009706183387172777, 8.915965962918118e-05},
        {-0.01854938074897275, 0.05314947489239771, -0.0308171267269281, -0.036533375191099525, 0.03316542086885796, -0.010552868542697307, 0.011544277517043788, -0.0009557323968441251, -0.00045068967175771347},
        {0.01064436905603481, -0.0308171267269281, 0.018462723963845806, 0.022968067376515865, -0.03583239489148013, 0.006218553475097828, 0.01061999246095631, -0.002903616181241441, 0.0006394314671991143},
        {0.01241587592778768, -0.036533375191099525, 0.022968067376515865, 0.031301941902489624, -0.07853362488294166, 0.007573049948557747, 0.05018975541388473, -0.010999162958019384, 0.0016174724628252588},
        {-0.008496438244342118, 0.03316542086885796, -0.03583239489148013, -0.07853362488294166, 0.5280607591637034, -0.009556215450295903, -0.5222311266445284, 0.10565038749730445, -0.012226767416277042},
        {0.0036658631276739566, -0.010552868542697307, 0.006218553475097828, 0.007573049948557747, -0.009556215450295903, 0.002185356658351782, 0.000738492936467786, -0.0004415898626870822, 0.00016935770953201737},
        {-0.007235019693087945, 0.011544277517043788, 0.01061999246095631, 0.05018975541388473, -0.5222311266445284, 0.000738492936467786, 0.5551245635531046, -0.11113861624726193, 0.0123876807034219},
        {0.0009706183387172777, -0.0009557323968441251, -0.002903616181241441, -0.010999162958019384, 0.10565038749730445, -0.0004415898626870822, -0.11113861624726193, 0.022343144039090435, -0.0025254322290580527},
        {8.915965962918118e-05, -0.00045068967175771347, 0.0006394314671991143, 0.0016174724628252588, -0.012226767416277042, 0.00016935770953201737, 0.0123876807034219, -0.0025254322290580527, 0.000299787314484133},
    },
};

}  // namespace shapeopt::coeffs
